"""Neural-network layers with explicit forward/backward passes.

Every layer keeps its parameters in ``self.p`` and the gradients of the
last backward call in ``self.g`` (same keys). Convolution is stride-1,
3x3, zero-padded "same"; it is computed as 9 shifted GEMMs rather than an
im2col buffer, which keeps memory flat and the backward pass exact.
Max-pooling routes gradients to the first maximum in each 2x2 window, so
tied inputs have a deterministic subgradient — finite-difference checks
rely on that.
"""

from __future__ import annotations

import numpy as np

BN_EPS = 1e-5
BN_MOMENTUM = 0.9


class Layer:
    """Base: parameterless, shape-preserving identity."""

    def __init__(self) -> None:
        self.p: dict[str, np.ndarray] = {}
        self.g: dict[str, np.ndarray] = {}
        self.state: dict[str, np.ndarray] = {}  # non-trainable buffers

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Dense(Layer):
    """y = x @ w + b over the last axis."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        self.n_in, self.n_out = n_in, n_out
        self.p = {
            "w": he_uniform(rng, (n_in, n_out), n_in, dtype),
            "b": np.zeros(n_out, dtype=dtype),
        }

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ValueError(f"dense expects (n, {self.n_in}), got {x.shape}")
        self._x = x
        return x @ self.p["w"] + self.p["b"]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        self.g = {"w": self._x.T @ grad, "b": grad.sum(axis=0)}
        return grad @ self.p["w"].T


class ReLU(Layer):
    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad * self._mask


class Conv3x3(Layer):
    """3x3 convolution, stride 1, zero-padded to keep H x W ("same")."""

    def __init__(self, c_in: int, c_out: int, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        self.c_in, self.c_out = c_in, c_out
        fan_in = c_in * 9
        self.p = {
            "w": he_uniform(rng, (c_out, c_in, 3, 3), fan_in, dtype),
            "b": np.zeros(c_out, dtype=dtype),
        }

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.c_in:
            raise ValueError(f"conv expects (n, {self.c_in}, h, w), got {x.shape}")
        n, _, h, w = x.shape
        xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        self._xp = xp
        self._hw = (h, w)
        out = np.empty((n, self.c_out, h, w), dtype=x.dtype)
        out[:] = self.p["b"][None, :, None, None]
        for di in range(3):
            for dj in range(3):
                # window of the padded input aligned with kernel tap (di, dj)
                patch = xp[:, :, di : di + h, dj : dj + w]
                out += np.einsum(
                    "nchw,fc->nfhw", patch, self.p["w"][:, :, di, dj], optimize=True
                )
        return out

    def backward(self, grad: np.ndarray) -> np.ndarray:
        h, w = self._hw
        xp = self._xp
        gw = np.empty_like(self.p["w"])
        gxp = np.zeros_like(xp)
        for di in range(3):
            for dj in range(3):
                patch = xp[:, :, di : di + h, dj : dj + w]
                gw[:, :, di, dj] = np.einsum(
                    "nfhw,nchw->fc", grad, patch, optimize=True
                )
                gxp[:, :, di : di + h, dj : dj + w] += np.einsum(
                    "nfhw,fc->nchw", grad, self.p["w"][:, :, di, dj], optimize=True
                )
        self.g = {"w": gw, "b": grad.sum(axis=(0, 2, 3))}
        return gxp[:, :, 1:-1, 1:-1]


class MaxPool2x2(Layer):
    """2x2 max pool, stride 2; odd trailing rows/columns are dropped."""

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        n, c, h, w = x.shape
        h2, w2 = h // 2, w // 2
        if h2 == 0 or w2 == 0:
            raise ValueError(f"input {h}x{w} too small for a 2x2 pool")
        cropped = x[:, :, : h2 * 2, : w2 * 2]
        windows = (
            cropped.reshape(n, c, h2, 2, w2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h2, w2, 4)
        )
        self._argmax = np.argmax(windows, axis=-1)  # first max wins on ties
        self._in_shape = x.shape
        return np.take_along_axis(windows, self._argmax[..., None], axis=-1)[..., 0]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        n, c, h, w = self._in_shape
        h2, w2 = h // 2, w // 2
        scattered = np.zeros((n, c, h2, w2, 4), dtype=grad.dtype)
        np.put_along_axis(scattered, self._argmax[..., None], grad[..., None], axis=-1)
        out = np.zeros((n, c, h, w), dtype=grad.dtype)
        out[:, :, : h2 * 2, : w2 * 2] = (
            scattered.reshape(n, c, h2, w2, 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h2 * 2, w2 * 2)
        )
        return out


class BatchNorm2d(Layer):
    """Per-channel batch normalization over (n, h, w).

    Training uses batch statistics and updates running averages with
    momentum; inference uses the running statistics only, so results do
    not depend on batch composition.
    """

    def __init__(self, channels: int, dtype=np.float32):
        super().__init__()
        self.channels = channels
        self.p = {
            "gamma": np.ones(channels, dtype=dtype),
            "beta": np.zeros(channels, dtype=dtype),
        }
        self.state = {
            "running_mean": np.zeros(channels, dtype=dtype),
            "running_var": np.ones(channels, dtype=dtype),
        }

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.channels:
            raise ValueError(
                f"batchnorm expects (n, {self.channels}, h, w), got {x.shape}"
            )
        if training:
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            self.state["running_mean"] = (
                BN_MOMENTUM * self.state["running_mean"] + (1 - BN_MOMENTUM) * mean
            ).astype(x.dtype)
            self.state["running_var"] = (
                BN_MOMENTUM * self.state["running_var"] + (1 - BN_MOMENTUM) * var
            ).astype(x.dtype)
        else:
            mean = self.state["running_mean"]
            var = self.state["running_var"]
        std = np.sqrt(var + BN_EPS)
        xhat = (x - mean[None, :, None, None]) / std[None, :, None, None]
        self._xhat, self._std, self._training = xhat, std, training
        return self.p["gamma"][None, :, None, None] * xhat + self.p["beta"][
            None, :, None, None
        ]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        xhat, std = self._xhat, self._std
        self.g = {
            "gamma": (grad * xhat).sum(axis=(0, 2, 3)),
            "beta": grad.sum(axis=(0, 2, 3)),
        }
        gxhat = grad * self.p["gamma"][None, :, None, None]
        if not self._training:
            return gxhat / std[None, :, None, None]
        m = grad.shape[0] * grad.shape[2] * grad.shape[3]
        sum_g = gxhat.sum(axis=(0, 2, 3), keepdims=True)
        sum_gx = (gxhat * xhat).sum(axis=(0, 2, 3), keepdims=True)
        return (gxhat - sum_g / m - xhat * sum_gx / m) / std[None, :, None, None]


class Dropout(Layer):
    """Inverted dropout; identity when not training or when rng is unset."""

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0,1), got {rate}")
        self.rate = rate
        self.rng: np.random.Generator | None = None

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if not training or self.rate == 0.0 or self.rng is None:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (self.rng.random(x.shape) < keep).astype(x.dtype) / keep
        return x * self._mask

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._mask is None:
            return grad
        return grad * self._mask


class Flatten(Layer):
    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad.reshape(self._shape)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
