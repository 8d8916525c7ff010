"""Finite-difference validation of the analytic backward pass.

Runs the model in double precision with dropout disabled and batch-norm in
training mode (batch statistics), perturbs sampled parameters by ±epsilon,
and compares the central difference of the loss against the analytic
gradient. The relative error metric is |ga - gn| / max(1e-8, |ga| + |gn|).

The loss surface is only piecewise smooth: ReLU and max-pool switch linear
pieces at measure-zero boundaries, and a central difference across such a
boundary does not estimate a derivative at all. Each probe therefore
records the network's activation pattern (ReLU masks, pool argmax choices)
at +epsilon and -epsilon; probes whose two patterns differ straddle a
switching boundary and are resampled. The backward pass itself is always
evaluated at the unperturbed point.
"""

from __future__ import annotations

import numpy as np

from .layers import Layer, MaxPool2x2, ReLU
from .model import UamatModel, batch_loss


def _forward_with_pattern(
    model: UamatModel, mels: np.ndarray, users: np.ndarray, labels: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    probs = model.forward_batch(mels, users, training=True)
    pattern: list[np.ndarray] = []
    for _, layer in model.layers():
        if isinstance(layer, ReLU):
            pattern.append(layer._mask.copy())
        elif isinstance(layer, MaxPool2x2):
            pattern.append(layer._argmax.copy())
    return batch_loss(probs, labels), pattern


def _same_pattern(a: list[np.ndarray], b: list[np.ndarray]) -> bool:
    return all(np.array_equal(x, y) for x, y in zip(a, b))


def grad_check(
    model: UamatModel,
    mels: np.ndarray,
    users: np.ndarray,
    labels: np.ndarray,
    epsilon: float = 1e-4,
    samples_per_layer_type: int = 25,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and numeric gradients.

    Checks at least `samples_per_layer_type` parameters for each layer type
    that has any (batch-norm, conv, dense), skipping probes that straddle a
    ReLU/pool switching boundary (see module docstring).
    """
    if model.config.dtype != "float64":
        raise ValueError(
            "grad_check requires a float64 model; finite differences "
            "drown in float32 rounding"
        )
    labels = np.asarray(labels, dtype=np.int64)
    model.set_dropout_rng(None)  # dropout must be inactive

    # analytic gradients at the unperturbed point
    probs = model.forward_batch(mels, users, training=True)
    onehot = np.zeros_like(probs)
    onehot[np.arange(len(labels)), labels] = 1.0
    model.backward_batch((probs - onehot) / len(labels))
    analytic = {
        name: layer.g[key].copy() for name, layer, key in model.param_items()
    }

    by_type: dict[str, list[tuple[str, Layer, str]]] = {}
    for name, layer, key in model.param_items():
        by_type.setdefault(type(layer).__name__, []).append((name, layer, key))

    rng = np.random.default_rng([seed, 31])
    max_rel = 0.0
    for _type_name, entries in sorted(by_type.items()):
        total = sum(layer.p[key].size for _, layer, key in entries)
        target = min(samples_per_layer_type, total)
        accepted = 0
        attempts = 0
        while accepted < target and attempts < 40 * target:
            attempts += 1
            flat = int(rng.integers(0, total))
            for name, layer, key in entries:
                if flat < layer.p[key].size:
                    break
                flat -= layer.p[key].size
            param = layer.p[key]
            idx = np.unravel_index(flat, param.shape)
            orig = param[idx]
            param[idx] = orig + epsilon
            loss_plus, pat_plus = _forward_with_pattern(model, mels, users, labels)
            param[idx] = orig - epsilon
            loss_minus, pat_minus = _forward_with_pattern(model, mels, users, labels)
            param[idx] = orig
            if not _same_pattern(pat_plus, pat_minus):
                continue  # non-differentiable inside the probe interval
            accepted += 1
            numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
            ga = float(analytic[name][idx])
            rel = abs(ga - numeric) / max(1e-8, abs(ga) + abs(numeric))
            max_rel = max(max_rel, rel)
        if accepted < target:
            raise RuntimeError(
                f"grad_check could not find {target} smooth probes for "
                f"{_type_name}; got {accepted} after {attempts} attempts"
            )
    return max_rel
