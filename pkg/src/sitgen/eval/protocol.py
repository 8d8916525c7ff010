"""Evaluation protocols: split, train both branches, score, aggregate.

Each protocol cell (taxonomy size × split kind) runs over several seeds;
the report carries per-seed rows plus mean(std), per-branch confusion
matrices summed over seeds, and — when both branches run — the joint
overlap. The real-time branch has no cold-track condition of its own
(its features never involve tracks); on cold-track protocols it simply
trains and evaluates on that split's streams.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..datagen.splits import DatasetSplit, SplitKind, make_split
from ..domain import Demographics, Stream, TaxonomySubset
from ..features.als import InteractionMatrix, train_user_embeddings
from ..features.encoders import CountryVocab, assemble_sp_features_batch
from ..gbdt.boosting import SpForest, SpTrainConfig, sp_train
from ..nn.model import UamatConfig, UamatModel
from ..nn.training import TrainConfig, train
from .metrics import (
    accuracy_at_k,
    confusion_matrix,
    joint_overlap,
    macro_auc_ovr,
    topk_indices,
)

DEFAULT_TEST_FRACTION = 0.2
DEFAULT_K = 3


@dataclass(frozen=True)
class UamatExperimentConfig:
    """Desk-scale settings for the offline branch inside a protocol run."""

    width: float = 0.25
    lr0: float = 3e-3
    max_epochs: int = 10
    patience: int = 3
    batch_size: int = 32
    embedding_dim: int = 128
    als_iterations: int = 8
    als_alpha: float = 40.0
    als_reg: float = 0.01


@dataclass
class SeedResult:
    seed: int
    metrics: dict[str, float]  # flat: "<branch>_accuracy", "sp_auc", "overlap", ...


@dataclass
class EvalReport:
    kind: str
    c: int
    k: int
    branches: tuple[str, ...]
    seeds: list[int]
    per_seed: list[SeedResult]
    mean: dict[str, float]
    std: dict[str, float]
    confusion: dict[str, np.ndarray]  # branch -> (C, C) counts over all seeds

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "c": self.c,
            "k": self.k,
            "branches": list(self.branches),
            "seeds": self.seeds,
            "per_seed": [
                {"seed": r.seed, **{k: float(v) for k, v in r.metrics.items()}}
                for r in self.per_seed
            ],
            "mean": {k: float(v) for k, v in self.mean.items()},
            "std": {k: float(v) for k, v in self.std.items()},
            "confusion": {b: m.tolist() for b, m in self.confusion.items()},
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, obj: dict) -> "EvalReport":
        per_seed = [
            SeedResult(
                seed=int(row["seed"]),
                metrics={k: float(v) for k, v in row.items() if k != "seed"},
            )
            for row in obj["per_seed"]
        ]
        return cls(
            kind=str(obj["kind"]),
            c=int(obj["c"]),
            k=int(obj["k"]),
            branches=tuple(obj["branches"]),
            seeds=[int(s) for s in obj["seeds"]],
            per_seed=per_seed,
            mean={k: float(v) for k, v in obj["mean"].items()},
            std={k: float(v) for k, v in obj["std"].items()},
            confusion={
                b: np.array(m, dtype=np.int64) for b, m in obj["confusion"].items()
            },
        )


@dataclass
class EvalData:
    """Lookups the protocols draw inputs from."""

    demographics: dict[str, Demographics]
    audio: dict[str, np.ndarray] | None = None  # mel matrix per track


# ---- branch runners ----


def sp_design_matrix(
    streams: list[Stream], demographics: dict[str, Demographics]
) -> tuple[np.ndarray, np.ndarray, CountryVocab]:
    """Features/labels for the real-time branch, with a vocabulary built
    from exactly these streams' users (what a training run would see)."""
    users = sorted({s.user for s in streams})
    vocab = CountryVocab(
        demographics[u].country for u in users if u in demographics
    )
    x = assemble_sp_features_batch(streams, demographics, vocab)
    y = np.array([s.situation.index for s in streams])
    return x, y, vocab


def prepare_sp_matrices(
    split: DatasetSplit, demographics: dict[str, Demographics]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, CountryVocab]:
    x_train, y_train, vocab = sp_design_matrix(list(split.train), demographics)
    x_test = assemble_sp_features_batch(list(split.test), demographics, vocab)
    y_test = np.array([s.situation.index for s in split.test])
    return x_train, y_train, x_test, y_test, vocab


def run_sp_branch(
    split: DatasetSplit,
    c: int,
    demographics: dict[str, Demographics],
    cfg: SpTrainConfig,
) -> tuple[SpForest, np.ndarray]:
    """Train on the split's train side; return (forest, test probabilities)."""
    x_train, y_train, x_test, _y, _vocab = prepare_sp_matrices(split, demographics)
    forest = sp_train(x_train, y_train, cfg, c=c)
    return forest, forest.predict_proba(x_test)


def train_split_embeddings(
    split: DatasetSplit, ex: UamatExperimentConfig, seed: int
) -> dict[str, np.ndarray]:
    """ALS user embeddings from the split's training interactions only,
    so held-out users are genuinely cold."""
    counts: dict[tuple[str, str], float] = {}
    for s in split.train:
        counts[(s.user, s.track)] = counts.get((s.user, s.track), 0.0) + 1.0
    matrix = InteractionMatrix.from_counts(counts)
    model = train_user_embeddings(
        matrix,
        d=ex.embedding_dim,
        reg=ex.als_reg,
        alpha=ex.als_alpha,
        iters=ex.als_iterations,
        seed=seed,
    )
    return {u: model.user_factors[i] for i, u in enumerate(model.user_ids)}


def _uamat_inputs(
    streams: list[Stream],
    audio: dict[str, np.ndarray],
    embeddings: dict[str, np.ndarray],
    dim: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mels = np.stack([audio[s.track] for s in streams])
    users = np.zeros((len(streams), dim), dtype=np.float32)
    for i, s in enumerate(streams):
        emb = embeddings.get(s.user)
        if emb is not None:
            users[i] = emb
    labels = np.array([s.situation.index for s in streams])
    return mels, users, labels


def run_uamat_branch(
    split: DatasetSplit,
    c: int,
    data: EvalData,
    ex: UamatExperimentConfig,
    seed: int,
) -> tuple[UamatModel, np.ndarray]:
    """Train the offline branch on the split; return (model, test probs).

    Test predictions are computed per distinct (track, user) pair and
    broadcast back to streams — the tag-store serving model does the same.
    """
    if data.audio is None:
        raise ValueError("this protocol needs per-track audio matrices")
    embeddings = train_split_embeddings(split, ex, seed)
    mels, users, labels = _uamat_inputs(
        list(split.train), data.audio, embeddings, ex.embedding_dim
    )
    n_mels, n_frames = mels.shape[1], mels.shape[2]
    model = UamatModel.build(
        UamatConfig(
            c=c,
            n_mels=n_mels,
            n_frames=n_frames,
            user_dim=ex.embedding_dim,
            width=ex.width,
            init_seed=seed,
        )
    )
    cfg = TrainConfig(
        lr0=ex.lr0,
        max_epochs=ex.max_epochs,
        patience=ex.patience,
        batch_size=ex.batch_size,
        seed=seed,
    )
    model, _history = train(model, mels, users, labels, cfg)

    pairs = sorted({(s.track, s.user) for s in split.test})
    pair_probs: dict[tuple[str, str], np.ndarray] = {}
    batch = 64
    for start in range(0, len(pairs), batch):
        chunk = pairs[start : start + batch]
        p_mels = np.stack([data.audio[t] for t, _ in chunk])
        p_users = np.zeros((len(chunk), ex.embedding_dim), dtype=np.float32)
        for i, (_, u) in enumerate(chunk):
            emb = embeddings.get(u)
            if emb is not None:
                p_users[i] = emb
        probs = model.forward_batch(p_mels, p_users, training=False)
        for (t, u), row in zip(chunk, probs):
            pair_probs[(t, u)] = row
    test_probs = np.stack([pair_probs[(s.track, s.user)] for s in split.test])
    return model, test_probs


# ---- protocol driver ----


def _branch_metrics(
    prefix: str, probs: np.ndarray, labels: np.ndarray, k: int
) -> dict[str, float]:
    preds = topk_indices(probs, 1)[:, 0]
    return {
        f"{prefix}_accuracy": 100.0 * float(np.mean(preds == labels)),
        f"{prefix}_accuracy_at_k": accuracy_at_k(probs, labels, k),
        f"{prefix}_auc": macro_auc_ovr(probs, labels),
    }


def _check_protocol_inputs(
    streams: list[Stream], c: int, branches: tuple[str, ...]
) -> None:
    TaxonomySubset(c)
    for b in branches:
        if b not in ("sp", "uamat"):
            raise ValueError(f"unknown branch {b!r}")
    if not all(s.situation is not None and s.situation.index < c for s in streams):
        raise ValueError(f"streams must be labeled within the first {c} situations")


def run_protocol_seed(
    streams: list[Stream],
    c: int,
    kind: SplitKind | str,
    data: EvalData,
    seed: int,
    branches: tuple[str, ...] = ("sp", "uamat"),
    sp_cfg: SpTrainConfig = SpTrainConfig(),
    uamat_cfg: UamatExperimentConfig = UamatExperimentConfig(),
    test_fraction: float = DEFAULT_TEST_FRACTION,
    k: int = DEFAULT_K,
) -> tuple[SeedResult, dict[str, np.ndarray]]:
    """One protocol cell at one seed: (per-seed metrics, per-branch confusion)."""
    kind = SplitKind(kind) if isinstance(kind, str) else kind
    _check_protocol_inputs(streams, c, branches)
    k = min(k, c)
    split = make_split(streams, kind, test_fraction, seed)
    labels = np.array([s.situation.index for s in split.test])
    metrics: dict[str, float] = {}
    branch_probs: dict[str, np.ndarray] = {}
    if "sp" in branches:
        _forest, probs = run_sp_branch(split, c, data.demographics, sp_cfg)
        branch_probs["sp"] = probs
    if "uamat" in branches:
        _model, probs = run_uamat_branch(split, c, data, uamat_cfg, seed)
        branch_probs["uamat"] = probs
    confusion: dict[str, np.ndarray] = {}
    for b, probs in branch_probs.items():
        metrics.update(_branch_metrics(b, probs, labels, k))
        preds = topk_indices(probs, 1)[:, 0]
        confusion[b] = confusion_matrix(preds, labels, c)
    if len(branch_probs) == 2:
        _ua, _sp, overlap = joint_overlap(
            branch_probs["uamat"], branch_probs["sp"], labels
        )
        metrics["overlap"] = overlap
    return SeedResult(seed=seed, metrics=metrics), confusion


def combine_seed_results(
    kind: SplitKind | str,
    c: int,
    k: int,
    branches: tuple[str, ...],
    results: list[tuple[SeedResult, dict[str, np.ndarray]]],
) -> EvalReport:
    """Aggregate per-seed cell results into one report (order-preserving)."""
    kind = SplitKind(kind) if isinstance(kind, str) else kind
    per_seed = [r for r, _ in results]
    confusion = {b: np.zeros((c, c), dtype=np.int64) for b in branches}
    for _, conf in results:
        for b, m in conf.items():
            confusion[b] += m
    keys = sorted(per_seed[0].metrics)
    mean = {key: float(np.mean([r.metrics[key] for r in per_seed])) for key in keys}
    std = {key: float(np.std([r.metrics[key] for r in per_seed])) for key in keys}
    return EvalReport(
        kind=kind.value,
        c=c,
        k=min(k, c),
        branches=tuple(branches),
        seeds=[r.seed for r in per_seed],
        per_seed=per_seed,
        mean=mean,
        std=std,
        confusion=confusion,
    )


def run_protocol(
    streams: list[Stream],
    c: int,
    kind: SplitKind | str,
    data: EvalData,
    seeds: tuple[int, ...] = (0, 1, 2),
    branches: tuple[str, ...] = ("sp", "uamat"),
    sp_cfg: SpTrainConfig = SpTrainConfig(),
    uamat_cfg: UamatExperimentConfig = UamatExperimentConfig(),
    test_fraction: float = DEFAULT_TEST_FRACTION,
    k: int = DEFAULT_K,
) -> EvalReport:
    results = [
        run_protocol_seed(
            streams, c, kind, data, seed, branches, sp_cfg, uamat_cfg,
            test_fraction, k,
        )
        for seed in seeds
    ]
    return combine_seed_results(kind, c, k, branches, results)


@dataclass
class LocalVsGlobalRow:
    location: str
    n_test: int
    global_accuracy: float
    local_accuracy: float


def local_vs_global(
    streams: list[Stream],
    c: int,
    demographics: dict[str, Demographics],
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4),
    sp_cfg: SpTrainConfig = SpTrainConfig(),
    test_fraction: float = DEFAULT_TEST_FRACTION,
    min_location_streams: int = 50,
) -> tuple[list[LocalVsGlobalRow], list[str]]:
    """Warm-split comparison of one global model vs per-location models.

    Returns (rows averaged over seeds, skipped-location names)."""
    locations = sorted({s.location for s in streams if s.location is not None})
    if len(locations) < 2:
        raise ValueError(f"need at least 2 locations, found {locations}")
    skipped = [
        loc
        for loc in locations
        if sum(s.location == loc for s in streams) < min_location_streams
    ]
    kept = [loc for loc in locations if loc not in skipped]

    sums: dict[str, list[float]] = {loc: [0.0, 0.0, 0.0] for loc in kept}
    for seed in seeds:
        split = make_split(streams, SplitKind.WARM, test_fraction, seed)
        x_train, y_train, x_test, y_test, _vocab = prepare_sp_matrices(
            split, demographics
        )
        global_forest = sp_train(x_train, y_train, sp_cfg, c=c)
        test_locs = np.array([s.location for s in split.test])
        train_locs = np.array([s.location for s in split.train])
        for loc in kept:
            train_mask = train_locs == loc
            local_forest = sp_train(
                x_train[train_mask], y_train[train_mask], sp_cfg, c=c
            )
            mask = test_locs == loc
            g_pred = global_forest.predict_proba(x_test[mask]).argmax(axis=1)
            l_pred = local_forest.predict_proba(x_test[mask]).argmax(axis=1)
            sums[loc][0] += 100.0 * float(np.mean(g_pred == y_test[mask]))
            sums[loc][1] += 100.0 * float(np.mean(l_pred == y_test[mask]))
            sums[loc][2] += int(mask.sum())

    rows = [
        LocalVsGlobalRow(
            location=loc,
            n_test=int(sums[loc][2] / len(seeds)),
            global_accuracy=sums[loc][0] / len(seeds),
            local_accuracy=sums[loc][1] / len(seeds),
        )
        for loc in kept
    ]
    return rows, skipped
