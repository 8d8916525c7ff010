"""Input encodings for the situation predictor: device, time, demographics.

The 8 device features come out in a fixed order (linear time, linear day,
circular time x/y, circular day x/y, device code, network code) and the
3 demographic features append after them, giving the 11-d SP input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..domain import Demographics, DeviceSnapshot, Gender

SP_FEATURE_NAMES = (
    "linear_time", "linear_day",
    "circ_time_x", "circ_time_y",
    "circ_day_x", "circ_day_y",
    "device_code", "network_code",
    "age_norm", "country_code", "gender_code",
)

N_DEVICE_FEATURES = 8
N_DEMOGRAPHIC_FEATURES = 3
N_SP_FEATURES = N_DEVICE_FEATURES + N_DEMOGRAPHIC_FEATURES

_CIRCLE_TOL = 1e-9


@dataclass(frozen=True)
class DeviceFeatures:
    linear_time: float
    linear_day: float
    circ_time_x: float
    circ_time_y: float
    circ_day_x: float
    circ_day_y: float
    device_code: int
    network_code: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.linear_time < 1.0:
            raise ValueError(f"linear_time out of [0,1): {self.linear_time}")
        if not 0.0 <= self.linear_day < 1.0:
            raise ValueError(f"linear_day out of [0,1): {self.linear_day}")
        for x, y in ((self.circ_time_x, self.circ_time_y),
                     (self.circ_day_x, self.circ_day_y)):
            if abs(x * x + y * y - 1.0) > _CIRCLE_TOL:
                raise ValueError(f"circular pair off the unit circle: ({x}, {y})")
        if self.device_code not in (0, 1, 2):
            raise ValueError(f"device_code out of range: {self.device_code}")
        if self.network_code not in (0, 1, 2, 3):
            raise ValueError(f"network_code out of range: {self.network_code}")

    def vector(self) -> np.ndarray:
        return np.array(
            [self.linear_time, self.linear_day,
             self.circ_time_x, self.circ_time_y,
             self.circ_day_x, self.circ_day_y,
             float(self.device_code), float(self.network_code)],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class DemographicFeatures:
    age_norm: float
    country_code: int
    gender_code: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.age_norm <= 1.0:
            raise ValueError(f"age_norm out of [0,1]: {self.age_norm}")
        if self.country_code < 0 or self.gender_code < 0:
            raise ValueError("codes must be nonnegative")

    def vector(self) -> np.ndarray:
        return np.array(
            [self.age_norm, float(self.country_code), float(self.gender_code)],
            dtype=np.float64,
        )


def encode_device(snap: DeviceSnapshot) -> DeviceFeatures:
    ts = snap.local_timestamp
    seconds = ts.hour * 3600 + ts.minute * 60 + ts.second
    linear_time = seconds / 86400.0
    linear_day = snap.day_of_week / 7.0
    time_angle = 2.0 * math.pi * linear_time
    day_angle = 2.0 * math.pi * snap.day_of_week / 7.0
    return DeviceFeatures(
        linear_time=linear_time,
        linear_day=linear_day,
        circ_time_x=math.cos(time_angle),
        circ_time_y=math.sin(time_angle),
        circ_day_x=math.cos(day_angle),
        circ_day_y=math.sin(day_angle),
        device_code=snap.device_type.code,
        network_code=snap.network_type.code,
    )


AGE_CLAMP_LOW = 10
AGE_CLAMP_HIGH = 90
UNKNOWN_AGE_NORM = 0.5


class CountryVocab:
    """Dataset-local country dictionary; 0 is reserved for unknown.

    Codes are assigned by sorted country string, so a vocabulary built from
    the same data is always identical.
    """

    UNKNOWN = "??"

    def __init__(self, countries: Iterable[str]):
        known = sorted({c for c in countries if c and c != self.UNKNOWN})
        self._codes = {c: i + 1 for i, c in enumerate(known)}

    def code(self, country: str | None) -> int:
        if country is None:
            return 0
        return self._codes.get(country, 0)

    def __len__(self) -> int:
        return len(self._codes) + 1

    def to_json(self) -> dict:
        return dict(self._codes)

    @classmethod
    def from_json(cls, obj: dict) -> "CountryVocab":
        vocab = cls([])
        vocab._codes = {str(k): int(v) for k, v in obj.items()}
        return vocab


def encode_demographics(g: Demographics, vocab: CountryVocab) -> DemographicFeatures:
    if g.age == 0:
        age_norm = UNKNOWN_AGE_NORM
    else:
        clamped = min(max(g.age, AGE_CLAMP_LOW), AGE_CLAMP_HIGH)
        age_norm = (clamped - AGE_CLAMP_LOW) / (AGE_CLAMP_HIGH - AGE_CLAMP_LOW)
    return DemographicFeatures(
        age_norm=age_norm,
        country_code=vocab.code(g.country),
        gender_code=g.gender.code,
    )


def assemble_sp_features(
    snap: DeviceSnapshot, g: Demographics, vocab: CountryVocab
) -> np.ndarray:
    """The 11-d SP input: device features followed by demographic features."""
    return np.concatenate(
        [encode_device(snap).vector(), encode_demographics(g, vocab).vector()]
    )


def encode_device_batch(
    seconds_of_day: np.ndarray,
    day_of_week: np.ndarray,
    device_code: np.ndarray,
    network_code: np.ndarray,
) -> np.ndarray:
    """Vectorized device encoding; one row per input, same layout as above."""
    n = len(seconds_of_day)
    out = np.empty((n, N_DEVICE_FEATURES), dtype=np.float64)
    linear_time = seconds_of_day / 86400.0
    out[:, 0] = linear_time
    out[:, 1] = day_of_week / 7.0
    time_angle = 2.0 * np.pi * linear_time
    day_angle = 2.0 * np.pi * day_of_week / 7.0
    out[:, 2] = np.cos(time_angle)
    out[:, 3] = np.sin(time_angle)
    out[:, 4] = np.cos(day_angle)
    out[:, 5] = np.sin(day_angle)
    out[:, 6] = device_code
    out[:, 7] = network_code
    return out


def assemble_sp_features_batch(
    streams: Sequence,
    demographics: dict[str, Demographics],
    vocab: CountryVocab,
) -> np.ndarray:
    """11-d SP features for a list of streams; unknown users get sentinels."""
    n = len(streams)
    seconds = np.empty(n)
    dow = np.empty(n)
    dev = np.empty(n)
    net = np.empty(n)
    demo = np.empty((n, N_DEMOGRAPHIC_FEATURES))
    unknown = Demographics()
    for i, s in enumerate(streams):
        ts = s.device.local_timestamp
        seconds[i] = ts.hour * 3600 + ts.minute * 60 + ts.second
        dow[i] = s.device.day_of_week
        dev[i] = s.device.device_type.code
        net[i] = s.device.network_type.code
        g = demographics.get(s.user, unknown)
        demo[i] = encode_demographics(g, vocab).vector()
    return np.hstack([encode_device_batch(seconds, dow, dev, net), demo])
