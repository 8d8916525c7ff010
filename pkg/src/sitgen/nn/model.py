"""Two-branch situation tagger: spectrogram CNN fused with a user vector.

Audio branch: input batch-norm, four conv3x3 + ReLU + maxpool blocks with
filter counts (32, 64, 128, 256) scaled by a width multiplier, flatten,
dense 256 + ReLU — the 256-d audio embedding. User branch: two dense 128 +
ReLU. The branches concatenate into dense 128 + ReLU, dropout 0.3, and a
dense softmax head with one unit per active situation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domain import ProbabilityVector, Situation, TaxonomySubset
from .layers import (
    BatchNorm2d,
    Conv3x3,
    Dense,
    Dropout,
    Flatten,
    Layer,
    MaxPool2x2,
    ReLU,
    softmax,
)

AUDIO_EMBEDDING_DIM = 256
USER_BRANCH_DIM = 128
MERGE_DIM = 128
BASE_FILTERS = (32, 64, 128, 256)
DROPOUT_RATE = 0.3
FULL_INPUT_SHAPE = (96, 646)
REDUCED_INPUT_SHAPE = (32, 64)


@dataclass(frozen=True)
class UamatConfig:
    c: int = 4
    n_mels: int = FULL_INPUT_SHAPE[0]
    n_frames: int = FULL_INPUT_SHAPE[1]
    user_dim: int = 128
    width: float = 1.0
    dropout: float = DROPOUT_RATE
    dtype: str = "float32"
    init_seed: int = 0

    def __post_init__(self) -> None:
        TaxonomySubset(self.c)
        if self.n_mels < 16 or self.n_frames < 16:
            raise ValueError(
                f"input {self.n_mels}x{self.n_frames} too small for four 2x2 pools"
            )
        if self.width <= 0:
            raise ValueError(f"width multiplier must be positive, got {self.width}")
        if self.dtype not in ("float32", "float64"):
            raise ValueError(f"dtype must be float32 or float64, got {self.dtype}")

    @property
    def filters(self) -> tuple[int, ...]:
        return tuple(max(1, round(f * self.width)) for f in BASE_FILTERS)

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64


def _pooled_shape(h: int, w: int, n_pools: int = 4) -> tuple[int, int]:
    for _ in range(n_pools):
        h, w = h // 2, w // 2
    return h, w


@dataclass
class UamatModel:
    config: UamatConfig
    audio_layers: list[Layer]
    user_layers: list[Layer]
    merge_layers: list[Layer]
    metrics: dict = field(default_factory=dict)

    @classmethod
    def build(cls, config: UamatConfig) -> "UamatModel":
        rng = np.random.default_rng([config.init_seed, 17])
        dt = config.np_dtype
        filters = config.filters
        audio: list[Layer] = [BatchNorm2d(1, dtype=dt)]
        c_in = 1
        for f in filters:
            audio += [Conv3x3(c_in, f, rng, dtype=dt), ReLU(), MaxPool2x2()]
            c_in = f
        audio.append(Flatten())
        ph, pw = _pooled_shape(config.n_mels, config.n_frames)
        flat_dim = filters[-1] * ph * pw
        audio += [Dense(flat_dim, AUDIO_EMBEDDING_DIM, rng, dtype=dt), ReLU()]

        user: list[Layer] = [
            Dense(config.user_dim, USER_BRANCH_DIM, rng, dtype=dt),
            ReLU(),
            Dense(USER_BRANCH_DIM, USER_BRANCH_DIM, rng, dtype=dt),
            ReLU(),
        ]
        merge: list[Layer] = [
            Dense(AUDIO_EMBEDDING_DIM + USER_BRANCH_DIM, MERGE_DIM, rng, dtype=dt),
            ReLU(),
            Dropout(config.dropout),
            Dense(MERGE_DIM, config.c, rng, dtype=dt),
        ]
        return cls(config=config, audio_layers=audio, user_layers=user, merge_layers=merge)

    # ---- parameter plumbing ----

    def layers(self) -> list[tuple[str, Layer]]:
        named = []
        for prefix, group in (
            ("audio", self.audio_layers),
            ("user", self.user_layers),
            ("merge", self.merge_layers),
        ):
            for i, layer in enumerate(group):
                named.append((f"{prefix}.{i}.{type(layer).__name__}", layer))
        return named

    def param_items(self) -> list[tuple[str, Layer, str]]:
        """(qualified name, layer, key) for every trainable array,
        in declaration order."""
        items = []
        for name, layer in self.layers():
            for key in layer.p:
                items.append((f"{name}.{key}", layer, key))
        return items

    def state_items(self) -> list[tuple[str, Layer, str]]:
        items = []
        for name, layer in self.layers():
            for key in layer.state:
                items.append((f"{name}.{key}", layer, key))
        return items

    def n_parameters(self) -> int:
        return sum(layer.p[k].size for _, layer, k in self.param_items())

    def set_dropout_rng(self, rng: np.random.Generator | None) -> None:
        for layer in self.merge_layers:
            if isinstance(layer, Dropout):
                layer.rng = rng

    # ---- forward / backward ----

    def _check_inputs(self, mels: np.ndarray, users: np.ndarray) -> None:
        cfg = self.config
        if mels.ndim != 3 or mels.shape[1:] != (cfg.n_mels, cfg.n_frames):
            raise ValueError(
                f"expected mels (n, {cfg.n_mels}, {cfg.n_frames}), got {mels.shape}"
            )
        if users.ndim != 2 or users.shape[1] != cfg.user_dim:
            raise ValueError(
                f"expected user vectors (n, {cfg.user_dim}), got {users.shape}"
            )
        if len(mels) != len(users):
            raise ValueError(f"batch mismatch: {len(mels)} mels vs {len(users)} users")

    def forward_batch(
        self, mels: np.ndarray, users: np.ndarray, training: bool = False
    ) -> np.ndarray:
        """Class probabilities, shape (n, C)."""
        dt = self.config.np_dtype
        mels = np.asarray(mels, dtype=dt)
        users = np.asarray(users, dtype=dt)
        self._check_inputs(mels, users)
        x = mels[:, None, :, :]  # single input channel
        for layer in self.audio_layers:
            x = layer.forward(x, training)
        u = users
        for layer in self.user_layers:
            u = layer.forward(u, training)
        self._audio_dim = x.shape[1]
        z = np.concatenate([x, u], axis=1)
        for layer in self.merge_layers:
            z = layer.forward(z, training)
        return softmax(z)

    def backward_batch(self, grad_logits: np.ndarray) -> None:
        """Backpropagate d(loss)/d(logits); gradients land in the layers."""
        g = grad_logits
        for layer in reversed(self.merge_layers):
            g = layer.backward(g)
        ga, gu = g[:, : self._audio_dim], g[:, self._audio_dim :]
        for layer in reversed(self.audio_layers):
            ga = layer.backward(ga)
        for layer in reversed(self.user_layers):
            gu = layer.backward(gu)

    def audio_embedding(self, mels: np.ndarray) -> np.ndarray:
        """256-d audio-branch output (inference mode)."""
        dt = self.config.np_dtype
        x = np.asarray(mels, dtype=dt)[:, None, :, :]
        for layer in self.audio_layers:
            x = layer.forward(x, False)
        return x

    def predict(self, mel: np.ndarray, user: np.ndarray) -> ProbabilityVector:
        probs = self.forward_batch(mel[None, ...], user[None, ...], training=False)[0]
        return ProbabilityVector(tuple(float(v) for v in probs))


def forward(
    model: UamatModel, mel: np.ndarray, user: np.ndarray, training: bool = False
) -> ProbabilityVector:
    probs = model.forward_batch(mel[None, ...], user[None, ...], training=training)[0]
    return ProbabilityVector(tuple(float(v) for v in probs))


LOSS_CLIP = 1e-12


def loss(p: ProbabilityVector, label: Situation) -> float:
    """Cross-entropy of one prediction, clipped below at 1e-12."""
    return float(-np.log(max(p.probs[label.index], LOSS_CLIP)))


def batch_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    picked = np.clip(probs[np.arange(len(labels)), labels], LOSS_CLIP, None)
    return float(-np.mean(np.log(picked)))
