"""Mini-batch Adam training for the two-branch tagger.

Learning rate follows a staircase exponential decay, lr0 * rate^(iter//1000).
A stratified 10% of the training streams is held out for validation; training
stops at max_epochs or after `patience` epochs without a validation-loss
improvement, and the best-validation parameters are restored.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .model import UamatModel, batch_loss


@dataclass(frozen=True)
class TrainConfig:
    lr0: float = 0.1
    decay_rate: float = 0.96
    decay_every: int = 1000
    batch_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_epochs: int = 50
    patience: int = 5
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lr0 <= 0:
            raise ValueError(f"lr0 must be positive, got {self.lr0}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")

    def lr_at(self, iteration: int) -> float:
        return self.lr0 * self.decay_rate ** (iteration // self.decay_every)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float
    lr: float


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int = -1
    best_val_loss: float = float("inf")

    def to_json(self) -> dict:
        return {
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "epochs": [vars(e) for e in self.epochs],
        }


class Adam:
    """Adam with bias correction; one slot pair per parameter array."""

    def __init__(self, cfg: TrainConfig):
        self.cfg = cfg
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, model: UamatModel, lr: float) -> None:
        cfg = self.cfg
        self.t += 1
        bc1 = 1.0 - cfg.beta1**self.t
        bc2 = 1.0 - cfg.beta2**self.t
        for name, layer, key in model.param_items():
            g = layer.g[key].astype(np.float64)
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            self.m[name] = cfg.beta1 * self.m[name] + (1 - cfg.beta1) * g
            self.v[name] = cfg.beta2 * self.v[name] + (1 - cfg.beta2) * g * g
            mhat = self.m[name] / bc1
            vhat = self.v[name] / bc2
            update = lr * mhat / (np.sqrt(vhat) + cfg.eps)
            layer.p[key] = (layer.p[key].astype(np.float64) - update).astype(
                layer.p[key].dtype
            )


def stratified_holdout(
    labels: np.ndarray, val_fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Per-class split into (train indices, validation indices)."""
    train_idx: list[int] = []
    val_idx: list[int] = []
    for cls in np.unique(labels):
        rows = np.flatnonzero(labels == cls)
        rows = rows[rng.permutation(len(rows))]
        n_val = int(round(len(rows) * val_fraction))
        if len(rows) > 1:
            n_val = min(max(n_val, 1), len(rows) - 1)
        else:
            n_val = 0
        val_idx.extend(rows[:n_val])
        train_idx.extend(rows[n_val:])
    return np.sort(np.array(train_idx, dtype=np.int64)), np.sort(
        np.array(val_idx, dtype=np.int64)
    )


def _snapshot(model: UamatModel) -> dict[str, np.ndarray]:
    snap = {}
    for name, layer, key in model.param_items():
        snap[f"p:{name}"] = layer.p[key].copy()
    for name, layer, key in model.state_items():
        snap[f"s:{name}"] = layer.state[key].copy()
    return snap


def _restore(model: UamatModel, snap: dict[str, np.ndarray]) -> None:
    for name, layer, key in model.param_items():
        layer.p[key] = snap[f"p:{name}"].copy()
    for name, layer, key in model.state_items():
        layer.state[key] = snap[f"s:{name}"].copy()


def _evaluate(
    model: UamatModel,
    mels: np.ndarray,
    users: np.ndarray,
    labels: np.ndarray,
    batch_size: int,
) -> tuple[float, float]:
    losses = []
    correct = 0
    for start in range(0, len(labels), batch_size):
        sl = slice(start, start + batch_size)
        probs = model.forward_batch(mels[sl], users[sl], training=False)
        losses.append(batch_loss(probs, labels[sl]) * len(labels[sl]))
        correct += int(np.sum(np.argmax(probs, axis=1) == labels[sl]))
    return float(np.sum(losses) / len(labels)), correct / len(labels)


def train(
    model: UamatModel,
    mels: np.ndarray,
    users: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig,
) -> tuple[UamatModel, TrainHistory]:
    """Optimize in place and return (model, history). Inputs are aligned
    arrays: mel batch (n, F, T), user vectors (n, d), label indices (n,)."""
    if len(labels) == 0:
        raise ValueError("cannot train on an empty stream list")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.max() >= model.config.c:
        raise ValueError(
            f"label index {labels.max()} outside model output width {model.config.c}"
        )

    rng = np.random.default_rng([cfg.seed, 23])
    train_idx, val_idx = stratified_holdout(labels, cfg.val_fraction, rng)
    has_val = len(val_idx) > 0
    model.set_dropout_rng(np.random.default_rng([cfg.seed, 29]))

    opt = Adam(cfg)
    history = TrainHistory()
    best = _snapshot(model)
    iteration = 0
    epochs_since_best = 0

    for epoch in range(cfg.max_epochs):
        order = train_idx[rng.permutation(len(train_idx))]
        epoch_losses = []
        correct = 0
        for start in range(0, len(order), cfg.batch_size):
            rows = order[start : start + cfg.batch_size]
            probs = model.forward_batch(mels[rows], users[rows], training=True)
            epoch_losses.append(batch_loss(probs, labels[rows]) * len(rows))
            correct += int(np.sum(np.argmax(probs, axis=1) == labels[rows]))
            onehot = np.zeros_like(probs)
            onehot[np.arange(len(rows)), labels[rows]] = 1.0
            model.backward_batch((probs - onehot) / len(rows))
            opt.step(model, cfg.lr_at(iteration))
            iteration += 1

        train_loss = float(np.sum(epoch_losses) / len(order))
        train_acc = correct / len(order)
        if has_val:
            val_loss, val_acc = _evaluate(
                model, mels[val_idx], users[val_idx], labels[val_idx], cfg.batch_size
            )
        else:
            val_loss, val_acc = train_loss, train_acc
        history.epochs.append(
            EpochStats(
                epoch=epoch,
                train_loss=train_loss,
                train_accuracy=train_acc,
                val_loss=val_loss,
                val_accuracy=val_acc,
                lr=cfg.lr_at(max(iteration - 1, 0)),
            )
        )
        if val_loss < history.best_val_loss:
            history.best_val_loss = val_loss
            history.best_epoch = epoch
            best = _snapshot(model)
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= cfg.patience:
                break

    _restore(model, best)
    model.set_dropout_rng(None)
    model.metrics = {
        "best_epoch": history.best_epoch,
        "best_val_loss": history.best_val_loss,
        "epochs_run": len(history.epochs),
    }
    return model, history
