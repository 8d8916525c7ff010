"""Second-order gradient tree boosting with a multiclass softmax objective.

One regression tree per class per round, exact greedy splits over sorted
unique feature values, shrinkage on leaf weights. Everything is
deterministic: gain ties break toward the lowest feature index, then the
lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domain import ProbabilityVector, Situation, TaxonomySubset, top_k_situations
from ..features.encoders import N_SP_FEATURES, SP_FEATURE_NAMES


@dataclass(frozen=True)
class SpTrainConfig:
    rounds: int = 100
    max_depth: int = 6
    shrinkage: float = 0.3
    l2_reg: float = 1.0
    min_child_weight: float = 1.0
    min_gain: float = 0.0

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if not 0.0 < self.shrinkage <= 1.0:
            raise ValueError(f"shrinkage must be in (0,1], got {self.shrinkage}")
        if self.max_depth < 0:
            raise ValueError(f"max_depth must be >= 0, got {self.max_depth}")


@dataclass
class Tree:
    """Flat binary tree; leaf weights already carry the shrinkage factor."""

    feature: np.ndarray    # u8 per node, 0 on leaves
    threshold: np.ndarray  # f32, 0 on leaves
    left: np.ndarray       # u32, 0 on leaves
    right: np.ndarray      # u32, 0 on leaves
    is_leaf: np.ndarray    # u8
    weight: np.ndarray     # f32, 0 on internal nodes

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf weight per row of X."""
        nodes = np.zeros(len(X), dtype=np.int64)
        active = self.is_leaf[nodes] == 0
        while active.any():
            idx = np.flatnonzero(active)
            cur = nodes[idx]
            go_left = X[idx, self.feature[cur]] < self.threshold[cur]
            nodes[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.is_leaf[nodes] == 0
        return self.weight[nodes].astype(np.float64)


class _TreeBuilder:
    def __init__(self, X: np.ndarray, cfg: SpTrainConfig):
        self.X = X
        self.cfg = cfg
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.is_leaf: list[int] = []
        self.weight: list[float] = []

    def _emit(self) -> int:
        self.feature.append(0)
        self.threshold.append(0.0)
        self.left.append(0)
        self.right.append(0)
        self.is_leaf.append(1)
        self.weight.append(0.0)
        return len(self.feature) - 1

    def build(self, idx: np.ndarray, g: np.ndarray, h: np.ndarray) -> Tree:
        self._grow(idx, g, h, depth=0)
        return Tree(
            feature=np.array(self.feature, dtype=np.uint8),
            threshold=np.array(self.threshold, dtype=np.float32),
            left=np.array(self.left, dtype=np.uint32),
            right=np.array(self.right, dtype=np.uint32),
            is_leaf=np.array(self.is_leaf, dtype=np.uint8),
            weight=np.array(self.weight, dtype=np.float32),
        )

    def _grow(self, idx: np.ndarray, g: np.ndarray, h: np.ndarray, depth: int) -> int:
        node = self._emit()
        cfg = self.cfg
        g_sum = float(g[idx].sum())
        h_sum = float(h[idx].sum())

        split = None
        if depth < cfg.max_depth and len(idx) >= 2:
            split = find_best_split(self.X, idx, g, h, g_sum, h_sum, cfg)
        if split is None:
            # leaf weight -G/(H+lambda), shrunk
            self.weight[node] = np.float32(
                -cfg.shrinkage * g_sum / (h_sum + cfg.l2_reg)
            )
            return node

        feat, thr, _gain = split
        go_left = self.X[idx, feat] < thr
        left_child = self._grow(idx[go_left], g, h, depth + 1)
        right_child = self._grow(idx[~go_left], g, h, depth + 1)
        self.feature[node] = feat
        self.threshold[node] = np.float32(thr)
        self.left[node] = left_child
        self.right[node] = right_child
        self.is_leaf[node] = 0
        return node


def find_best_split(
    X: np.ndarray,
    idx: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    g_sum: float,
    h_sum: float,
    cfg: SpTrainConfig,
) -> tuple[int, float, float] | None:
    """Exact greedy search: best (feature, threshold, gain) or None.

    Candidates are midpoints between consecutive distinct sorted values.
    Gain ties keep the earlier feature, then the lower threshold.
    """
    lam = cfg.l2_reg
    parent_score = g_sum * g_sum / (h_sum + lam)
    best: tuple[int, float, float] | None = None
    for feat in range(X.shape[1]):
        xs = X[idx, feat]
        order = np.argsort(xs, kind="stable")
        sx = xs[order]
        gl = np.cumsum(g[idx][order])[:-1]
        hl = np.cumsum(h[idx][order])[:-1]
        distinct = sx[1:] > sx[:-1]
        ok = distinct & (hl >= cfg.min_child_weight) & (
            (h_sum - hl) >= cfg.min_child_weight
        )
        if not ok.any():
            continue
        gr = g_sum - gl
        hr = h_sum - hl
        with np.errstate(divide="ignore", invalid="ignore"):
            gains = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent_score)
        gains = gains - cfg.min_gain
        gains[~ok] = -np.inf
        pos = int(np.argmax(gains))  # first max = lowest threshold
        gain = float(gains[pos])
        if gain <= 0.0:
            continue
        if best is None or gain > best[2]:
            thr = float((sx[pos] + sx[pos + 1]) / 2.0)
            best = (feat, thr, gain)
    return best


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class SpForest:
    """Boosted forest: rounds x C trees plus the training configuration."""

    c: int
    config: SpTrainConfig
    trees: list[list[Tree]]  # [round][class]
    feature_names: tuple[str, ...] = SP_FEATURE_NAMES
    train_loss_history: list[float] = field(default_factory=list)
    _flat: dict | None = field(default=None, repr=False, compare=False)

    @property
    def subset(self) -> TaxonomySubset:
        return TaxonomySubset(self.c)

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        scores = np.zeros((len(X), self.c))
        for round_trees in self.trees:
            for k, tree in enumerate(round_trees):
                scores[:, k] += tree.predict(X)
        return scores

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.predict_scores(X))

    def _flat_arrays(self) -> dict:
        # all trees concatenated for a vectorized single-row traversal
        if self._flat is None:
            feature, threshold, left, right, is_leaf, weight = [], [], [], [], [], []
            roots, classes = [], []
            offset = 0
            for round_trees in self.trees:
                for k, t in enumerate(round_trees):
                    roots.append(offset)
                    classes.append(k)
                    feature.append(t.feature)
                    threshold.append(t.threshold)
                    left.append(t.left.astype(np.int64) + offset)
                    right.append(t.right.astype(np.int64) + offset)
                    is_leaf.append(t.is_leaf)
                    weight.append(t.weight)
                    offset += t.n_nodes
            self._flat = {
                "feature": np.concatenate(feature) if feature else np.zeros(0, np.uint8),
                "threshold": np.concatenate(threshold) if threshold else np.zeros(0, np.float32),
                "left": np.concatenate(left) if left else np.zeros(0, np.int64),
                "right": np.concatenate(right) if right else np.zeros(0, np.int64),
                "is_leaf": np.concatenate(is_leaf) if is_leaf else np.zeros(0, np.uint8),
                "weight": np.concatenate(weight) if weight else np.zeros(0, np.float32),
                "roots": np.array(roots, dtype=np.int64),
                "classes": np.array(classes, dtype=np.int64),
            }
        return self._flat

    def score_one(self, x: np.ndarray) -> np.ndarray:
        """Summed per-class scores for a single 11-d row; serving hot path."""
        flat = self._flat_arrays()
        nodes = flat["roots"].copy()
        if len(nodes) == 0:
            return np.zeros(self.c)
        for _ in range(self.config.max_depth + 1):
            alive = flat["is_leaf"][nodes] == 0
            if not alive.any():
                break
            cur = nodes[alive]
            go_left = x[flat["feature"][cur]] < flat["threshold"][cur]
            nodes[alive] = np.where(go_left, flat["left"][cur], flat["right"][cur])
        scores = np.zeros(self.c)
        np.add.at(scores, flat["classes"], flat["weight"][nodes].astype(np.float64))
        return scores


def multiclass_log_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    clipped = np.clip(probs[np.arange(len(labels)), labels], 1e-12, None)
    return float(-np.mean(np.log(clipped)))


def sp_train(
    X: np.ndarray | list,
    y: list[Situation] | np.ndarray,
    cfg: SpTrainConfig = SpTrainConfig(),
    c: int | None = None,
) -> SpForest:
    """Fit the boosted forest on 11-d rows and situation labels.

    Per round: softmax probabilities give per-class gradients p - onehot and
    hessians p(1-p); each class grows one tree on them. The multiclass
    log-loss on the training set is recorded after every round.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError(f"X must be a non-empty 2-d array, got shape {X.shape}")
    if X.shape[1] != N_SP_FEATURES:
        raise ValueError(f"expected {N_SP_FEATURES} features, got {X.shape[1]}")
    labels = np.array(
        [s.index if isinstance(s, Situation) else int(s) for s in y], dtype=np.int64
    )
    if len(labels) != len(X):
        raise ValueError(f"|X|={len(X)} != |y|={len(labels)}")
    if c is None:
        c = min(s for s in (4, 8, 12) if labels.max() < s)
    if labels.max() >= c:
        raise ValueError(f"label index {labels.max()} outside subset C={c}")

    n = len(X)
    onehot = np.zeros((n, c))
    onehot[np.arange(n), labels] = 1.0
    scores = np.zeros((n, c))
    all_rows = np.arange(n, dtype=np.int64)

    forest = SpForest(c=c, config=cfg, trees=[])
    for _ in range(cfg.rounds):
        probs = _softmax(scores)
        grad = probs - onehot
        hess = probs * (1.0 - probs)
        round_trees: list[Tree] = []
        for k in range(c):
            tree = _TreeBuilder(X, cfg).build(all_rows, grad[:, k], hess[:, k])
            scores[:, k] += tree.predict(X)
            round_trees.append(tree)
        forest.trees.append(round_trees)
        forest.train_loss_history.append(
            multiclass_log_loss(_softmax(scores), labels)
        )
    return forest


def sp_predict(forest: SpForest, x: np.ndarray) -> ProbabilityVector:
    """Softmax over summed per-class scores for one 11-d feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (N_SP_FEATURES,):
        raise ValueError(f"expected shape ({N_SP_FEATURES},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    scores = forest.score_one(x)
    z = scores - scores.max()
    e = np.exp(z)
    p = e / e.sum()
    return ProbabilityVector(tuple(float(v) for v in p))


DEFAULT_RANK_K = 3  # carousel-sized serving default


def sp_rank(
    forest: SpForest, x: np.ndarray, k: int = DEFAULT_RANK_K
) -> list[tuple[Situation, float]]:
    """Top-K situations by predicted probability, ties by canonical index."""
    if not 1 <= k <= forest.c:
        raise ValueError(f"K must be in [1, {forest.c}], got {k}")
    return top_k_situations(sp_predict(forest, x).probs, k)
