"""Offline tag store and the serving-side computations.

The heavy branch is precomputed: ``build_tag_store`` runs the tagger over a
(track, user) candidate grid and freezes the resulting distributions,
together with play-count popularity tables used for fallback ranking. The
lightweight branch stays live: ``infer_situations`` encodes a device
snapshot and ranks situations with the boosted forest at request time.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..domain import (
    UNKNOWN_DEMOGRAPHICS,
    Demographics,
    DeviceSnapshot,
    ProbabilityVector,
    Situation,
    Stream,
)
from ..features.encoders import CountryVocab, assemble_sp_features
from ..gbdt.boosting import SpForest, sp_rank
from ..gbdt.forestio import forest_to_bytes
from ..nn.model import UamatModel
from ..nn.modelio import model_to_bytes

DEFAULT_SESSION_LENGTH = 30
DEFAULT_CAROUSEL_K = 3


def model_digest(model: UamatModel) -> str:
    """Hash of the model's serialized artifact bytes."""
    return hashlib.sha256(model_to_bytes(model)).hexdigest()


def forest_digest(forest: SpForest) -> str:
    return hashlib.sha256(forest_to_bytes(forest)).hexdigest()


@dataclass
class TagStore:
    """Frozen (track, user) → situation-distribution map with popularity
    tables for fallback; versioned by the producing model's hash."""

    c: int
    model_hash: str
    track_ids: list[str]
    user_ids: list[str]
    pair_tracks: np.ndarray  # u32 index into track_ids, one per stored pair
    pair_users: np.ndarray  # u32 index into user_ids
    probs: np.ndarray  # (n_pairs, c) float32
    track_popularity: dict[str, int] = field(default_factory=dict)
    situation_popularity: dict[int, dict[str, int]] = field(default_factory=dict)
    skipped_pairs: int = 0

    def __post_init__(self) -> None:
        self._track_of = {t: i for i, t in enumerate(self.track_ids)}
        self._user_of = {u: i for i, u in enumerate(self.user_ids)}
        # per-user contiguous views for session generation
        self._user_rows: dict[int, np.ndarray] = {}
        order = np.argsort(self.pair_users, kind="stable")
        bounds = np.searchsorted(self.pair_users[order], np.arange(len(self.user_ids) + 1))
        for ui in range(len(self.user_ids)):
            rows = order[bounds[ui] : bounds[ui + 1]]
            if len(rows):
                self._user_rows[ui] = rows
        self._pair_row = {
            (int(t), int(u)): i
            for i, (t, u) in enumerate(zip(self.pair_tracks, self.pair_users))
        }

    @property
    def n_pairs(self) -> int:
        return len(self.pair_tracks)

    def lookup(self, track: str, user: str) -> ProbabilityVector | None:
        ti, ui = self._track_of.get(track), self._user_of.get(user)
        if ti is None or ui is None:
            return None
        row = self._pair_row.get((ti, ui))
        if row is None:
            return None
        return ProbabilityVector(tuple(float(v) for v in self.probs[row]))

    def has_user(self, user: str) -> bool:
        ui = self._user_of.get(user)
        return ui is not None and ui in self._user_rows

    def store_hash(self) -> str:
        """Deterministic content hash: identical model + inputs ⇒ identical hash."""
        h = hashlib.sha256()
        h.update(self.model_hash.encode())
        h.update(np.int64(self.c).tobytes())
        for name in self.track_ids:
            h.update(name.encode() + b"\x00")
        for name in self.user_ids:
            h.update(name.encode() + b"\x00")
        h.update(np.ascontiguousarray(self.pair_tracks, dtype=np.uint32).tobytes())
        h.update(np.ascontiguousarray(self.pair_users, dtype=np.uint32).tobytes())
        h.update(np.ascontiguousarray(self.probs, dtype=np.float32).tobytes())
        for sit in sorted(self.situation_popularity):
            for track, count in sorted(self.situation_popularity[sit].items()):
                h.update(f"{sit}:{track}:{count}".encode())
        for track, count in sorted(self.track_popularity.items()):
            h.update(f"{track}:{count}".encode())
        return h.hexdigest()


def popularity_tables(
    streams: list[Stream],
) -> tuple[dict[str, int], dict[int, dict[str, int]]]:
    """Play counts per track, overall and per labeled situation."""
    total: dict[str, int] = {}
    by_situation: dict[int, dict[str, int]] = {}
    for s in streams:
        total[s.track] = total.get(s.track, 0) + 1
        if s.situation is not None:
            table = by_situation.setdefault(s.situation.index, {})
            table[s.track] = table.get(s.track, 0) + 1
    return total, by_situation


def build_tag_store(
    model: UamatModel,
    tracks: list[str],
    users: list[str],
    mels: dict[str, np.ndarray],
    embeddings: dict[str, np.ndarray],
    labeled_streams: list[Stream] | None = None,
    candidates: list[tuple[str, str]] | None = None,
    batch_size: int = 64,
) -> TagStore:
    """Batch-infer the candidate grid (default: every track × every user).

    Pairs whose mel matrix or user embedding is missing are skipped and
    counted. Iteration order is sorted, so rebuilding from identical inputs
    yields an identical store hash.
    """
    track_ids = sorted(dict.fromkeys(tracks))
    user_ids = sorted(dict.fromkeys(users))
    track_of = {t: i for i, t in enumerate(track_ids)}
    user_of = {u: i for i, u in enumerate(user_ids)}
    if candidates is None:
        pair_list = [(t, u) for t in track_ids for u in user_ids]
    else:
        pair_list = sorted(dict.fromkeys(candidates))
        for t, u in pair_list:
            if t not in track_of or u not in user_of:
                raise ValueError(f"candidate pair ({t!r}, {u!r}) outside the grid")

    kept: list[tuple[str, str]] = []
    skipped = 0
    for t, u in pair_list:
        if t in mels and u in embeddings:
            kept.append((t, u))
        else:
            skipped += 1

    user_dim = model.config.user_dim
    probs = np.empty((len(kept), model.config.c), dtype=np.float32)
    for start in range(0, len(kept), batch_size):
        chunk = kept[start : start + batch_size]
        mel_batch = np.stack([mels[t] for t, _ in chunk])
        usr_batch = np.stack(
            [np.asarray(embeddings[u], dtype=np.float32) for _, u in chunk]
        )
        if usr_batch.shape[1] != user_dim:
            raise ValueError(
                f"embedding dim {usr_batch.shape[1]} != model user_dim {user_dim}"
            )
        probs[start : start + len(chunk)] = model.forward_batch(
            mel_batch, usr_batch, training=False
        )

    total, by_situation = popularity_tables(labeled_streams or [])
    return TagStore(
        c=model.config.c,
        model_hash=model_digest(model),
        track_ids=track_ids,
        user_ids=user_ids,
        pair_tracks=np.array([track_of[t] for t, _ in kept], dtype=np.uint32),
        pair_users=np.array([user_of[u] for _, u in kept], dtype=np.uint32),
        probs=probs,
        track_popularity=total,
        situation_popularity=by_situation,
        skipped_pairs=skipped,
    )


# ---- real-time ranking ----


@dataclass(frozen=True)
class SituationRanking:
    entries: list[tuple[Situation, float]]
    cold_user: bool


def infer_situations(
    forest: SpForest,
    vocab: CountryVocab,
    demographics: dict[str, Demographics],
    user: str,
    snap: DeviceSnapshot,
    k: int = DEFAULT_CAROUSEL_K,
) -> SituationRanking:
    """Rank situations for one request; unknown users get sentinel
    demographics and a cold_user flag."""
    demo = demographics.get(user)
    cold = demo is None
    features = assemble_sp_features(snap, demo or UNKNOWN_DEMOGRAPHICS, vocab)
    return SituationRanking(entries=sp_rank(forest, features, k), cold_user=cold)


# ---- session generation ----


@dataclass(frozen=True)
class SessionTrack:
    track_id: str
    score: float
    filled: bool


@dataclass(frozen=True)
class SessionPlan:
    user: str
    situation: Situation
    tracks: list[SessionTrack]
    cold_user: bool


def _popularity_ranking(
    store: TagStore, situation: Situation, exclude: set[str], n: int
) -> list[SessionTrack]:
    table = store.situation_popularity.get(situation.index, {})
    if not table:
        return []
    top = max(table.values())
    ranked = sorted(table.items(), key=lambda kv: (-kv[1], kv[0]))
    out = []
    for track, count in ranked:
        if track in exclude:
            continue
        out.append(SessionTrack(track_id=track, score=count / top, filled=True))
        if len(out) == n:
            break
    return out


def generate_session(
    store: TagStore,
    user: str,
    situation: Situation,
    n: int = DEFAULT_SESSION_LENGTH,
    floor: float | None = None,
) -> SessionPlan:
    """Ordered track list for (user, situation).

    Stored tracks are ranked by P(situation | track, user) descending, ties
    by popularity then track id; tracks at or below the probability floor
    (default 1/C — uniform distributions never pass) are excluded. Shortfall
    is filled from the situation's popularity table, marked ``filled`` and
    scored by popularity relative to the table's most-played track. Users
    absent from the store get a popularity-only list and a cold_user flag.
    """
    if n < 1:
        raise ValueError(f"n must be ≥ 1, got {n}")
    if situation.index >= store.c:
        raise ValueError(
            f"situation {situation.value!r} outside the store's subset C={store.c}"
        )
    if floor is None:
        floor = 1.0 / store.c
    ui = store._user_of.get(user)
    rows = store._user_rows.get(ui) if ui is not None else None
    if rows is None:
        return SessionPlan(
            user=user,
            situation=situation,
            tracks=_popularity_ranking(store, situation, set(), n),
            cold_user=True,
        )

    scores = store.probs[rows, situation.index].astype(np.float64)
    eligible = scores > floor
    chosen: list[SessionTrack] = []
    if eligible.any():
        cand_rows = rows[eligible]
        cand_scores = scores[eligible]
        cand_tracks = [store.track_ids[t] for t in store.pair_tracks[cand_rows]]
        cand_pop = [store.track_popularity.get(t, 0) for t in cand_tracks]
        order = sorted(
            range(len(cand_rows)),
            key=lambda i: (-cand_scores[i], -cand_pop[i], cand_tracks[i]),
        )
        for i in order[:n]:
            chosen.append(
                SessionTrack(
                    track_id=cand_tracks[i],
                    score=float(cand_scores[i]),
                    filled=False,
                )
            )
    if len(chosen) < n:
        chosen.extend(
            _popularity_ranking(
                store, situation, {t.track_id for t in chosen}, n - len(chosen)
            )
        )
    return SessionPlan(user=user, situation=situation, tracks=chosen, cold_user=False)
