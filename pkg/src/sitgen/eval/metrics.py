"""Evaluation metrics: accuracy (percent), top-K accuracy, macro one-vs-rest
AUC with midrank tie handling, confusion matrices, and the two-branch
overlap. Argmax and top-K ties break toward the lower class index."""

from __future__ import annotations

import numpy as np


def _as_label_array(labels, n: int, what: str) -> np.ndarray:
    arr = np.asarray(
        [lab if isinstance(lab, (int, np.integer)) else lab.index for lab in labels],
        dtype=np.int64,
    )
    if len(arr) != n:
        raise ValueError(f"{what}: expected {n} labels, got {len(arr)}")
    return arr


def _as_prob_matrix(probs) -> np.ndarray:
    if isinstance(probs, np.ndarray):
        mat = probs.astype(np.float64, copy=False)
    else:
        mat = np.asarray(
            [p.probs if hasattr(p, "probs") else p for p in probs], dtype=np.float64
        )
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise ValueError(f"expected a non-empty (n, C) probability array, got {mat.shape}")
    return mat


def accuracy(preds, labels) -> float:
    """Percent of exact matches."""
    pred_arr = _as_label_array(preds, len(preds), "preds")
    if len(pred_arr) == 0:
        raise ValueError("accuracy of an empty prediction list is undefined")
    label_arr = _as_label_array(labels, len(pred_arr), "labels")
    return 100.0 * float(np.mean(pred_arr == label_arr))


def topk_indices(probs: np.ndarray, k: int) -> np.ndarray:
    """(n, k) class indices ranked by descending probability; ties keep the
    lower class index first (stable sort on negated scores)."""
    order = np.argsort(-probs, axis=1, kind="stable")
    return order[:, :k]


def accuracy_at_k(probs, labels, k: int) -> float:
    """Percent of samples whose true class is among the top K predictions."""
    mat = _as_prob_matrix(probs)
    c = mat.shape[1]
    if not 1 <= k <= c:
        raise ValueError(f"K must be in [1, {c}], got {k}")
    label_arr = _as_label_array(labels, len(mat), "labels")
    top = topk_indices(mat, k)
    return 100.0 * float(np.mean(np.any(top == label_arr[:, None], axis=1)))


def rankdata_average(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned their average (midranks)."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    sx = x[order]
    boundaries = np.flatnonzero(np.r_[True, sx[1:] != sx[:-1], True])
    counts = np.diff(boundaries)
    # group starting at sorted position b with size m has average rank b + (m+1)/2
    group_ranks = boundaries[:-1] + (counts + 1) / 2.0
    ranks_sorted = np.repeat(group_ranks, counts)
    ranks = np.empty(len(x))
    ranks[order] = ranks_sorted
    return ranks


def auc_binary(scores: np.ndarray, positives: np.ndarray) -> float:
    """Mann-Whitney AUC of scores separating positives from negatives."""
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    n_pos = int(positives.sum())
    n_neg = len(positives) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both positive and negative samples")
    ranks = rankdata_average(scores)
    rank_sum = float(ranks[positives].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def macro_auc_detail(probs, labels) -> tuple[float, dict[int, float], tuple[int, ...]]:
    """(macro AUC over classes present, per-class AUC, skipped classes)."""
    mat = _as_prob_matrix(probs)
    label_arr = _as_label_array(labels, len(mat), "labels")
    c = mat.shape[1]
    present = [k for k in range(c) if np.any(label_arr == k)]
    if len(present) < 2:
        raise ValueError(
            f"macro AUC is undefined with {len(present)} class(es) present"
        )
    per_class: dict[int, float] = {}
    for k in present:
        per_class[k] = auc_binary(mat[:, k], label_arr == k)
    skipped = tuple(k for k in range(c) if k not in per_class)
    macro = float(np.mean([per_class[k] for k in present]))
    return macro, per_class, skipped


def macro_auc_ovr(probs, labels) -> float:
    """Macro average of one-vs-rest midrank AUCs over classes present."""
    return macro_auc_detail(probs, labels)[0]


def confusion_matrix(preds, labels, c: int) -> np.ndarray:
    """(C, C) counts; rows are true classes, columns predictions."""
    pred_arr = _as_label_array(preds, len(preds), "preds")
    label_arr = _as_label_array(labels, len(pred_arr), "labels")
    if len(pred_arr) and max(pred_arr.max(), label_arr.max()) >= c:
        raise ValueError("class index outside the declared taxonomy size")
    out = np.zeros((c, c), dtype=np.int64)
    np.add.at(out, (label_arr, pred_arr), 1)
    return out


def joint_overlap(uamat_probs, sp_probs, labels) -> tuple[float, float, float]:
    """(uamat accuracy, sp accuracy, overlap) in percent, where overlap
    counts streams on which both branches' argmax equals the truth."""
    ua = _as_prob_matrix(uamat_probs)
    sp = _as_prob_matrix(sp_probs)
    if len(ua) != len(sp):
        raise ValueError(f"misaligned branches: {len(ua)} vs {len(sp)} rows")
    label_arr = _as_label_array(labels, len(ua), "labels")
    ua_hit = np.argmax(ua, axis=1) == label_arr
    sp_hit = np.argmax(sp, axis=1) == label_arr
    return (
        100.0 * float(np.mean(ua_hit)),
        100.0 * float(np.mean(sp_hit)),
        100.0 * float(np.mean(ua_hit & sp_hit)),
    )
