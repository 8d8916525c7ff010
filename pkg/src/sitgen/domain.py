"""Core vocabulary: situations, identifiers, device snapshots, streams, sessions.

Every other module trades in these types. All of them are immutable values,
so they can be shared freely between threads and serialized canonically to
JSON (see ``to_json`` / ``from_json`` on each type).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Sequence

CANONICAL_TAGS: tuple[str, ...] = (
    "work", "gym", "party", "sleep",
    "morning", "run", "night", "dance",
    "car", "train", "relax", "club",
)

VALID_SUBSET_SIZES = (4, 8, 12)


class Situation(enum.Enum):
    """One of the 12 canonical listening situations.

    The declaration order fixes a stable integer index 0..11 used for
    probability vectors, confusion matrices and tie-breaking.
    """

    WORK = "work"
    GYM = "gym"
    PARTY = "party"
    SLEEP = "sleep"
    MORNING = "morning"
    RUN = "run"
    NIGHT = "night"
    DANCE = "dance"
    CAR = "car"
    TRAIN = "train"
    RELAX = "relax"
    CLUB = "club"

    @property
    def index(self) -> int:
        return _SITUATION_INDEX[self]

    @classmethod
    def from_index(cls, i: int) -> "Situation":
        if not 0 <= i < len(_SITUATIONS_BY_INDEX):
            raise ValueError(f"situation index must be in [0, 11], got {i}")
        return _SITUATIONS_BY_INDEX[i]

    @classmethod
    def from_tag(cls, tag: str) -> "Situation":
        try:
            return cls(tag)
        except ValueError:
            raise ValueError(f"unknown situation tag: {tag!r}") from None

    def __str__(self) -> str:
        return self.value


_SITUATIONS_BY_INDEX = tuple(Situation)
_SITUATION_INDEX = {s: i for i, s in enumerate(_SITUATIONS_BY_INDEX)}

assert tuple(s.value for s in _SITUATIONS_BY_INDEX) == CANONICAL_TAGS


@dataclass(frozen=True)
class TaxonomySubset:
    """The first C canonical situations, C in {4, 8, 12}.

    Subsets are nested by construction: members(4) is a prefix of members(8)
    which is a prefix of members(12).
    """

    c: int

    def __post_init__(self) -> None:
        if self.c not in VALID_SUBSET_SIZES:
            raise ValueError(f"C must be one of {VALID_SUBSET_SIZES}, got {self.c}")

    @property
    def members(self) -> tuple[Situation, ...]:
        return _SITUATIONS_BY_INDEX[: self.c]

    def __contains__(self, s: Situation) -> bool:
        return s.index < self.c

    def __iter__(self):
        return iter(self.members)


def _check_nesting() -> None:
    # Asserted at import: smaller subsets are prefixes of larger ones.
    for small, large in ((4, 8), (8, 12)):
        a = TaxonomySubset(small).members
        b = TaxonomySubset(large).members
        assert b[: len(a)] == a, "taxonomy subsets must be nested"


_check_nesting()


class DeviceType(enum.Enum):
    MOBILE = "mobile"
    DESKTOP = "desktop"
    TABLET = "tablet"

    @property
    def code(self) -> int:
        return _DEVICE_CODES[self]


_DEVICE_CODES = {d: i for i, d in enumerate(DeviceType)}


class NetworkType(enum.Enum):
    MOBILE = "mobile"
    WIFI = "wifi"
    LAN = "lan"
    PLANE = "plane"

    @property
    def code(self) -> int:
        return _NETWORK_CODES[self]


_NETWORK_CODES = {n: i for i, n in enumerate(NetworkType)}


class Gender(enum.Enum):
    UNKNOWN = "unknown"
    F = "f"
    M = "m"

    @property
    def code(self) -> int:
        return _GENDER_CODES[self]


_GENDER_CODES = {g: i for i, g in enumerate(Gender)}

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%S"


@dataclass(frozen=True)
class DeviceSnapshot:
    """Device-side data sent during one stream, already in local civil time."""

    local_timestamp: datetime
    day_of_week: int  # 0 = Monday, per ISO-8601
    device_type: DeviceType
    network_type: NetworkType

    def __post_init__(self) -> None:
        if self.local_timestamp.microsecond:
            object.__setattr__(
                self, "local_timestamp", self.local_timestamp.replace(microsecond=0)
            )
        if self.day_of_week != self.local_timestamp.weekday():
            raise ValueError(
                f"day_of_week={self.day_of_week} inconsistent with timestamp "
                f"{self.local_timestamp.isoformat()} (weekday "
                f"{self.local_timestamp.weekday()})"
            )

    @classmethod
    def at(
        cls, ts: datetime, device_type: DeviceType, network_type: NetworkType
    ) -> "DeviceSnapshot":
        ts = ts.replace(microsecond=0)
        return cls(ts, ts.weekday(), device_type, network_type)

    def to_json(self) -> dict:
        return {
            "local_timestamp": self.local_timestamp.strftime(TIMESTAMP_FORMAT),
            "day_of_week": self.day_of_week,
            "device_type": self.device_type.value,
            "network_type": self.network_type.value,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DeviceSnapshot":
        return cls(
            local_timestamp=datetime.strptime(obj["local_timestamp"], TIMESTAMP_FORMAT),
            day_of_week=int(obj["day_of_week"]),
            device_type=DeviceType(obj["device_type"]),
            network_type=NetworkType(obj["network_type"]),
        )


@dataclass(frozen=True)
class Demographics:
    """Basic registration data; unknowns use sentinel values, never dropped."""

    age: int = 0  # 0 = unknown
    country: str = "??"  # "??" = unknown
    gender: Gender = Gender.UNKNOWN

    def __post_init__(self) -> None:
        if not 0 <= self.age <= 120:
            raise ValueError(f"age must be in [0, 120], got {self.age}")

    def to_json(self) -> dict:
        return {"age": self.age, "country": self.country, "gender": self.gender.value}

    @classmethod
    def from_json(cls, obj: dict) -> "Demographics":
        return cls(int(obj["age"]), str(obj["country"]), Gender(obj["gender"]))


UNKNOWN_DEMOGRAPHICS = Demographics()


@dataclass(frozen=True)
class Stream:
    """One listening event: the atomic record everything trains on."""

    track: str
    user: str
    device: DeviceSnapshot
    situation: Optional[Situation] = None
    location: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.track:
            raise ValueError("track id must be non-empty")
        if not self.user:
            raise ValueError("user id must be non-empty")

    def to_json(self) -> dict:
        obj = {
            "track": self.track,
            "user": self.user,
            "device": self.device.to_json(),
        }
        if self.situation is not None:
            obj["situation"] = self.situation.value
        if self.location is not None:
            obj["location"] = self.location
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "Stream":
        situation = obj.get("situation")
        return cls(
            track=obj["track"],
            user=obj["user"],
            device=DeviceSnapshot.from_json(obj["device"]),
            situation=Situation(situation) if situation is not None else None,
            location=obj.get("location"),
        )


DEFAULT_SESSION_GAP_MINUTES = 20


@dataclass(frozen=True)
class Session:
    """A maximal run of one user's streams with gaps <= gap_minutes."""

    user: str
    streams: tuple[Stream, ...]
    gap_minutes: int = DEFAULT_SESSION_GAP_MINUTES

    def __post_init__(self) -> None:
        if not self.streams:
            raise ValueError("session must contain at least one stream")
        if any(s.user != self.user for s in self.streams):
            raise ValueError("all session streams must share the session user")
        times = [s.device.local_timestamp for s in self.streams]
        for prev, cur in zip(times, times[1:]):
            if cur < prev:
                raise ValueError("session timestamps must be nondecreasing")
            if (cur - prev).total_seconds() > self.gap_minutes * 60:
                raise ValueError(
                    f"session gap exceeds {self.gap_minutes} minutes"
                )


@dataclass(frozen=True)
class ProbabilityVector:
    """A distribution over the C members of the active taxonomy subset."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        c = len(self.probs)
        if c not in VALID_SUBSET_SIZES:
            raise ValueError(f"probability vector length must be in {VALID_SUBSET_SIZES}")
        total = 0.0
        for p in self.probs:
            if not (p == p and -1e-12 <= p <= 1.0 + 1e-9):  # NaN and range check
                raise ValueError(f"probability out of [0,1]: {p}")
            total += p
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"probabilities sum to {total}, expected 1 within 1e-6")

    @property
    def c(self) -> int:
        return len(self.probs)

    @property
    def subset(self) -> TaxonomySubset:
        return TaxonomySubset(self.c)

    def to_json(self) -> dict:
        return {"probs": list(self.probs)}

    @classmethod
    def from_json(cls, obj: dict) -> "ProbabilityVector":
        return cls(tuple(float(p) for p in obj["probs"]))


def argmax_situation(p: ProbabilityVector) -> Situation:
    """Most probable situation; ties go to the lowest canonical index."""
    best = 0
    for i, v in enumerate(p.probs):
        if v > p.probs[best]:
            best = i
    return Situation.from_index(best)


def top_k_situations(
    probs: Sequence[float], k: int
) -> list[tuple[Situation, float]]:
    """Top-k (situation, probability) by descending probability.

    Ties break toward the lower canonical index, so the result is
    deterministic for any input.
    """
    c = len(probs)
    if not 1 <= k <= c:
        raise ValueError(f"K must be in [1, {c}], got {k}")
    order = sorted(range(c), key=lambda i: (-probs[i], i))
    return [(Situation.from_index(i), float(probs[i])) for i in order[:k]]
