"""Train/test split construction for the three evaluation regimes.

cold_user — test users unseen in training, but their tracks must be known;
cold_track — the symmetric case; warm — users and tracks all seen, but no
(user, track) pair from the test side occurs in training. Streams that are
both new-user and new-track are excluded by construction. Budgets tolerate
±20% relative deviation because exact-fraction cold splits are generally
infeasible; anything worse raises with the violated invariant named.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..domain import Stream


class SplitKind(enum.Enum):
    COLD_USER = "cold_user"
    COLD_TRACK = "cold_track"
    WARM = "warm"


BUDGET_SLACK = 0.2  # relative tolerance on the achieved test share


@dataclass(frozen=True)
class DatasetSplit:
    kind: SplitKind
    train: tuple[Stream, ...]
    test: tuple[Stream, ...]
    # positions into the stream list the split was built from
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int
    test_fraction: float


class SplitError(ValueError):
    """Raised when the requested split cannot satisfy its invariants."""


def _check_budget(kind: SplitKind, n_test: int, n_total: int, test_fraction: float) -> None:
    target = test_fraction * n_total
    if not (1.0 - BUDGET_SLACK) * target <= n_test <= (1.0 + BUDGET_SLACK) * target:
        raise SplitError(
            f"{kind.value}: achieved test share {n_test}/{n_total} is outside "
            f"±{BUDGET_SLACK:.0%} of the requested fraction {test_fraction}"
        )


def _cold_split(
    streams: list[Stream],
    kind: SplitKind,
    test_fraction: float,
    rng: np.random.Generator,
) -> tuple[list[int], list[int]]:
    # "entity" is the held-out axis, "other" the axis that must stay seen
    if kind is SplitKind.COLD_USER:
        entity_of = [s.user for s in streams]
        other_of = [s.track for s in streams]
    else:
        entity_of = [s.track for s in streams]
        other_of = [s.user for s in streams]

    entities = sorted(set(entity_of))
    if len(entities) < 2:
        raise SplitError(
            f"{kind.value}: needs at least 2 distinct "
            f"{'users' if kind is SplitKind.COLD_USER else 'tracks'} to hold any out"
        )
    order = rng.permutation(len(entities))
    target = test_fraction * len(streams)

    held: set[str] = set()
    held_streams = 0
    per_entity: dict[str, int] = {}
    for i, e in enumerate(entity_of):
        per_entity[e] = per_entity.get(e, 0) + 1
    for j in order:
        e = entities[j]
        if held_streams >= target:
            break
        if len(held) == len(entities) - 1:
            break  # at least one entity must remain in training
        held.add(e)
        held_streams += per_entity[e]

    train_idx = [i for i, e in enumerate(entity_of) if e not in held]
    seen_other = {other_of[i] for i in train_idx}
    # drop test streams whose complementary entity never occurs in training
    # (the new-user AND new-track case is excluded by construction)
    test_idx = [
        i for i, e in enumerate(entity_of) if e in held and other_of[i] in seen_other
    ]
    if not test_idx:
        raise SplitError(
            f"{kind.value}: every held-out stream pairs with an unseen "
            f"{'track' if kind is SplitKind.COLD_USER else 'user'}; "
            "invariant 'test complement seen in train' cannot be met"
        )
    _check_budget(kind, len(test_idx), len(streams), test_fraction)
    return train_idx, test_idx


def _warm_split(
    streams: list[Stream], test_fraction: float, rng: np.random.Generator
) -> tuple[list[int], list[int]]:
    pair_rows: dict[tuple[str, str], list[int]] = {}
    user_count: dict[str, int] = {}
    track_count: dict[str, int] = {}
    for i, s in enumerate(streams):
        pair_rows.setdefault((s.user, s.track), []).append(i)
        user_count[s.user] = user_count.get(s.user, 0) + 1
        track_count[s.track] = track_count.get(s.track, 0) + 1

    pairs = sorted(pair_rows)
    order = rng.permutation(len(pairs))
    target = test_fraction * len(streams)

    test_idx: list[int] = []
    in_test: set[tuple[str, str]] = set()
    for j in order:
        if len(test_idx) >= target:
            break
        user, track = pairs[j]
        rows = pair_rows[(user, track)]
        # the user and the track must still occur in the remaining training set
        if user_count[user] - len(rows) < 1 or track_count[track] - len(rows) < 1:
            continue
        in_test.add((user, track))
        test_idx.extend(rows)
        user_count[user] -= len(rows)
        track_count[track] -= len(rows)

    if not test_idx:
        raise SplitError(
            "warm: no (user, track) pair can be held out while keeping its "
            "user and track represented in training"
        )
    _check_budget(SplitKind.WARM, len(test_idx), len(streams), test_fraction)
    train_idx = [
        i for i, s in enumerate(streams) if (s.user, s.track) not in in_test
    ]
    return train_idx, sorted(test_idx)


def make_split(
    streams: list[Stream],
    kind: SplitKind | str,
    test_fraction: float,
    seed: int,
) -> DatasetSplit:
    kind = SplitKind(kind) if isinstance(kind, str) else kind
    if not 0.0 < test_fraction < 0.5:
        raise ValueError(f"test_fraction must be in (0, 0.5), got {test_fraction}")
    if not streams:
        raise SplitError(f"{kind.value}: cannot split an empty stream list")
    kind_salt = {SplitKind.COLD_USER: 1, SplitKind.COLD_TRACK: 2, SplitKind.WARM: 3}
    rng = np.random.default_rng([seed, kind_salt[kind]])

    if kind is SplitKind.WARM:
        train_idx, test_idx = _warm_split(streams, test_fraction, rng)
    else:
        train_idx, test_idx = _cold_split(streams, kind, test_fraction, rng)

    split = DatasetSplit(
        kind=kind,
        train=tuple(streams[i] for i in train_idx),
        test=tuple(streams[i] for i in test_idx),
        train_indices=tuple(train_idx),
        test_indices=tuple(test_idx),
        seed=seed,
        test_fraction=test_fraction,
    )
    validate_split(split)
    return split


def validate_split(split: DatasetSplit) -> None:
    """Independent re-check of the split invariants; raises SplitError."""
    train_users = {s.user for s in split.train}
    train_tracks = {s.track for s in split.train}
    kind = split.kind
    if not split.train or not split.test:
        raise SplitError(f"{kind.value}: train and test must both be non-empty")
    if kind is SplitKind.COLD_USER:
        for s in split.test:
            if s.user in train_users:
                raise SplitError(f"cold_user: test user {s.user} appears in train")
            if s.track not in train_tracks:
                raise SplitError(f"cold_user: test track {s.track} unseen in train")
    elif kind is SplitKind.COLD_TRACK:
        for s in split.test:
            if s.track in train_tracks:
                raise SplitError(f"cold_track: test track {s.track} appears in train")
            if s.user not in train_users:
                raise SplitError(f"cold_track: test user {s.user} unseen in train")
    else:
        train_pairs = {(s.user, s.track) for s in split.train}
        for s in split.test:
            if s.user not in train_users:
                raise SplitError(f"warm: test user {s.user} unseen in train")
            if s.track not in train_tracks:
                raise SplitError(f"warm: test track {s.track} unseen in train")
            if (s.user, s.track) in train_pairs:
                raise SplitError(
                    f"warm: pair ({s.user}, {s.track}) occurs in both train and test"
                )
