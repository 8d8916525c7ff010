"""Reference classifiers the boosted forest is compared against.

A single CART-style decision tree (Gini impurity, exact greedy splits with
the same determinism rules as the forest) and a k-nearest-neighbour
classifier with one-hot expansion of the categorical columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..domain import ProbabilityVector, Situation
from ..features.encoders import N_SP_FEATURES

# column indices of categorical codes inside the 11-d feature vector
CATEGORICAL_COLUMNS = (6, 7, 9, 10)  # device, network, country, gender


def _as_labels(y, n_rows: int) -> np.ndarray:
    labels = np.array(
        [s.index if isinstance(s, Situation) else int(s) for s in y], dtype=np.int64
    )
    if len(labels) != n_rows:
        raise ValueError(f"got {n_rows} rows but {len(labels)} labels")
    return labels


def _check_features(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0 or X.shape[1] != N_SP_FEATURES:
        raise ValueError(f"expected a non-empty (n, {N_SP_FEATURES}) array")
    return X


@dataclass
class DecisionTreeClassifier:
    """CART with Gini impurity; leaves store class distributions."""

    max_depth: int = 6
    min_samples_split: int = 2

    def fit(self, X, y) -> "DecisionTreeClassifier":
        X = _check_features(X)
        labels = _as_labels(y, len(X))
        self.c_ = int(labels.max()) + 1
        self.c_ = min(s for s in (4, 8, 12) if self.c_ <= s)
        onehot = np.zeros((len(X), self.c_))
        onehot[np.arange(len(X)), labels] = 1.0
        self._feature: list[int] = []
        self._threshold: list[float] = []
        self._left: list[int] = []
        self._right: list[int] = []
        self._is_leaf: list[bool] = []
        self._dist: list[np.ndarray] = []
        self._grow(X, onehot, np.arange(len(X)), depth=0)
        return self

    def _emit(self) -> int:
        self._feature.append(0)
        self._threshold.append(0.0)
        self._left.append(0)
        self._right.append(0)
        self._is_leaf.append(True)
        self._dist.append(np.zeros(0))
        return len(self._feature) - 1

    def _grow(self, X, onehot, idx, depth) -> int:
        node = self._emit()
        counts = onehot[idx].sum(axis=0)
        total = counts.sum()
        self._dist[node] = counts / total

        pure = counts.max() == total
        if depth >= self.max_depth or len(idx) < self.min_samples_split or pure:
            return node
        split = self._best_split(X, onehot, idx)
        if split is None:
            return node
        feat, thr = split
        go_left = X[idx, feat] < thr
        left = self._grow(X, onehot, idx[go_left], depth + 1)
        right = self._grow(X, onehot, idx[~go_left], depth + 1)
        self._feature[node] = feat
        self._threshold[node] = thr
        self._left[node] = left
        self._right[node] = right
        self._is_leaf[node] = False
        return node

    def _best_split(self, X, onehot, idx) -> tuple[int, float] | None:
        """Largest Gini impurity decrease; ties keep the earlier feature,
        then the lower threshold."""
        n = len(idx)
        best: tuple[int, float, float] | None = None  # feat, thr, decrease
        total_counts = onehot[idx].sum(axis=0)
        parent_gini = 1.0 - np.square(total_counts / n).sum()
        for feat in range(X.shape[1]):
            xs = X[idx, feat]
            order = np.argsort(xs, kind="stable")
            sx = xs[order]
            left_counts = np.cumsum(onehot[idx][order], axis=0)[:-1]
            distinct = sx[1:] > sx[:-1]
            if not distinct.any():
                continue
            nl = np.arange(1, n, dtype=np.float64)
            nr = n - nl
            right_counts = total_counts - left_counts
            gini_l = 1.0 - np.square(left_counts / nl[:, None]).sum(axis=1)
            gini_r = 1.0 - np.square(right_counts / nr[:, None]).sum(axis=1)
            decrease = parent_gini - (nl * gini_l + nr * gini_r) / n
            decrease[~distinct] = -np.inf
            pos = int(np.argmax(decrease))
            dec = float(decrease[pos])
            if dec <= 0.0:
                continue
            if best is None or dec > best[2]:
                thr = float((sx[pos] + sx[pos + 1]) / 2.0)
                best = (feat, thr, dec)
        if best is None:
            return None
        return best[0], best[1]

    def predict_proba(self, X) -> np.ndarray:
        X = _check_features(X)
        out = np.empty((len(X), self.c_))
        for i, row in enumerate(X):
            node = 0
            while not self._is_leaf[node]:
                if row[self._feature[node]] < self._threshold[node]:
                    node = self._left[node]
                else:
                    node = self._right[node]
            out[i] = self._dist[node]
        return out

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def predict_one(self, x: np.ndarray) -> ProbabilityVector:
        p = self.predict_proba(np.asarray(x, dtype=np.float64)[None, :])[0]
        return ProbabilityVector(tuple(float(v) for v in p))


@dataclass
class KnnClassifier:
    """Euclidean kNN over features with categorical codes one-hot expanded."""

    k: int = 15

    def fit(self, X, y) -> "KnnClassifier":
        X = _check_features(X)
        labels = _as_labels(y, len(X))
        if not 1 <= self.k <= len(X):
            raise ValueError(f"k must be in [1, {len(X)}], got {self.k}")
        self.c_ = int(labels.max()) + 1
        self.c_ = min(s for s in (4, 8, 12) if self.c_ <= s)
        self._categories = [
            np.unique(X[:, col]) for col in CATEGORICAL_COLUMNS
        ]
        self._train = self._expand(X)
        self._labels = labels
        return self

    def _expand(self, X: np.ndarray) -> np.ndarray:
        """Replace each categorical column with one indicator per observed
        training value; unseen values map to the all-zero block."""
        numeric = np.delete(X, CATEGORICAL_COLUMNS, axis=1)
        blocks = [numeric]
        for col, cats in zip(CATEGORICAL_COLUMNS, self._categories):
            blocks.append((X[:, col][:, None] == cats[None, :]).astype(np.float64))
        return np.hstack(blocks)

    def predict_proba(self, X) -> np.ndarray:
        X = _check_features(X)
        q = self._expand(X)
        out = np.empty((len(X), self.c_))
        for i, row in enumerate(q):
            d2 = np.square(self._train - row).sum(axis=1)
            order = np.argsort(d2, kind="stable")[: self.k]  # distance ties: low row index
            votes = np.bincount(self._labels[order], minlength=self.c_)
            out[i] = votes / self.k
        return out

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def predict_one(self, x: np.ndarray) -> ProbabilityVector:
        p = self.predict_proba(np.asarray(x, dtype=np.float64)[None, :])[0]
        return ProbabilityVector(tuple(float(v) for v in p))
