"""Layers with hand-written forward and backward passes.

Tensors are ``(N, C, H, W)`` float64.  Each layer keeps whatever it needs
from its last forward call; ``backward`` consumes that cache, accumulates
parameter gradients into ``grads`` and returns the input gradient.
Convolution weights are stored ``(out_ch, in_ch, k, k)`` for both the
regular and the transposed kind.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class StaleCacheError(RuntimeError):
    """``backward`` was called without a matching ``forward``."""


class Layer:
    kind = "layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray, param_grads: bool = True) -> np.ndarray:
        raise NotImplementedError

    def zero_grad(self) -> None:
        for k, v in self.params.items():
            self.grads[k] = np.zeros_like(v)

    def _take_cache(self):
        if self._cache is None:
            raise StaleCacheError(f"{self.kind}: backward without a fresh forward")
        c, self._cache = self._cache, None
        return c

    def sublayers(self):
        return ()

    def config(self) -> dict:
        return {"kind": self.kind}


def _im2col(xp: np.ndarray, k: int, stride: int) -> np.ndarray:
    """Patches of a padded input as ``(N, Ho, Wo, C*k*k)``."""
    win = sliding_window_view(xp, (k, k), axis=(2, 3))[:, :, ::stride, ::stride]
    n, c, ho, wo = win.shape[:4]
    return win.transpose(0, 2, 3, 1, 4, 5).reshape(n, ho, wo, c * k * k)


def _col2im(cols: np.ndarray, shape, k: int, stride: int) -> np.ndarray:
    """Scatter-add ``(N, Ho, Wo, C, k, k)`` patches into a padded ``shape``."""
    n, ho, wo, c = cols.shape[:4]
    out = np.zeros(shape)
    for i in range(k):
        for j in range(k):
            out[:, :, i:i + stride * ho:stride, j:j + stride * wo:stride] += (
                cols[:, :, :, :, i, j].transpose(0, 3, 1, 2))
    return out


class Conv2d(Layer):
    kind = "conv"

    def __init__(self, in_ch: int, out_ch: int, k: int, stride: int = 1, padding: int = 0,
                 rng: np.random.Generator | None = None, init_std: float = 0.02):
        super().__init__()
        self.in_ch, self.out_ch, self.k, self.stride, self.padding = in_ch, out_ch, k, stride, padding
        rng = rng or np.random.default_rng(0)
        self.params["weight"] = rng.normal(0.0, init_std, size=(out_ch, in_ch, k, k))
        self.params["bias"] = np.zeros(out_ch)
        self.zero_grad()

    def out_shape(self, h: int, w: int) -> tuple[int, int]:
        return ((h + 2 * self.padding - self.k) // self.stride + 1,
                (w + 2 * self.padding - self.k) // self.stride + 1)

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.in_ch:
            raise ValueError(f"conv expects (N, {self.in_ch}, H, W), got {x.shape}")
        p = self.padding
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
        if xp.shape[2] < self.k or xp.shape[3] < self.k:
            raise ValueError(f"input {x.shape} too small for a {self.k}x{self.k} kernel")
        cols = _im2col(xp, self.k, self.stride)
        wmat = self.params["weight"].reshape(self.out_ch, -1)
        y = cols @ wmat.T + self.params["bias"]
        self._cache = (cols, xp.shape)
        return np.ascontiguousarray(y.transpose(0, 3, 1, 2))

    def backward(self, dy, param_grads=True):
        cols, xp_shape = self._take_cache()
        dyt = dy.transpose(0, 2, 3, 1)                       # (N, Ho, Wo, O)
        wmat = self.params["weight"].reshape(self.out_ch, -1)
        if param_grads:
            flat = dyt.reshape(-1, self.out_ch)
            self.grads["weight"] += (flat.T @ cols.reshape(-1, cols.shape[-1])).reshape(
                self.params["weight"].shape)
            self.grads["bias"] += flat.sum(axis=0)
        dcols = (dyt @ wmat).reshape(dyt.shape[:3] + (self.in_ch, self.k, self.k))
        dxp = _col2im(dcols, xp_shape, self.k, self.stride)
        p = self.padding
        return dxp[:, :, p:dxp.shape[2] - p, p:dxp.shape[3] - p] if p else dxp

    def config(self):
        return {"kind": self.kind, "in_ch": self.in_ch, "out_ch": self.out_ch, "k": self.k,
                "stride": self.stride, "padding": self.padding}


class ConvTranspose2d(Layer):
    """Adjoint of :class:`Conv2d`; output side ``(H - 1) s - 2 p + k``."""

    kind = "conv_transpose"

    def __init__(self, in_ch: int, out_ch: int, k: int, stride: int = 1, padding: int = 0,
                 rng: np.random.Generator | None = None, init_std: float = 0.02):
        super().__init__()
        self.in_ch, self.out_ch, self.k, self.stride, self.padding = in_ch, out_ch, k, stride, padding
        rng = rng or np.random.default_rng(0)
        self.params["weight"] = rng.normal(0.0, init_std, size=(out_ch, in_ch, k, k))
        self.params["bias"] = np.zeros(out_ch)
        self.zero_grad()

    def out_shape(self, h: int, w: int) -> tuple[int, int]:
        s, p, k = self.stride, self.padding, self.k
        return (h - 1) * s - 2 * p + k, (w - 1) * s - 2 * p + k

    def _wmat(self):
        # (in_ch, out_ch * k * k)
        return self.params["weight"].transpose(1, 0, 2, 3).reshape(self.in_ch, -1)

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.in_ch:
            raise ValueError(f"conv_transpose expects (N, {self.in_ch}, H, W), got {x.shape}")
        n, _, h, w = x.shape
        s, p, k = self.stride, self.padding, self.k
        xt = x.transpose(0, 2, 3, 1)                         # (N, H, W, I)
        cols = (xt @ self._wmat()).reshape(n, h, w, self.out_ch, k, k)
        full = (n, self.out_ch, (h - 1) * s + k, (w - 1) * s + k)
        yp = _col2im(cols, full, k, s)
        y = yp[:, :, p:full[2] - p, p:full[3] - p] if p else yp
        self._cache = xt
        return np.ascontiguousarray(y + self.params["bias"][None, :, None, None])

    def backward(self, dy, param_grads=True):
        xt = self._take_cache()
        p = self.padding
        dyp = np.pad(dy, ((0, 0), (0, 0), (p, p), (p, p))) if p else dy
        cols = _im2col(dyp, self.k, self.stride)             # (N, H, W, O*k*k)
        wmat = self._wmat()
        if param_grads:
            g = xt.reshape(-1, self.in_ch).T @ cols.reshape(-1, cols.shape[-1])
            self.grads["weight"] += g.reshape(self.in_ch, self.out_ch, self.k, self.k).transpose(1, 0, 2, 3)
            self.grads["bias"] += dy.sum(axis=(0, 2, 3))
        dx = cols @ wmat.T
        return np.ascontiguousarray(dx.transpose(0, 3, 1, 2))

    def config(self):
        return {"kind": self.kind, "in_ch": self.in_ch, "out_ch": self.out_ch, "k": self.k,
                "stride": self.stride, "padding": self.padding}


class InstanceNorm(Layer):
    """Per-sample, per-channel standardisation without affine parameters."""

    kind = "instance_norm"

    def __init__(self, eps: float = 1e-5):
        super().__init__()
        self.eps = eps

    def forward(self, x):
        mu = x.mean(axis=(2, 3), keepdims=True)
        xc = x - mu
        var = np.mean(xc * xc, axis=(2, 3), keepdims=True)
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = xc * inv
        self._cache = (xhat, inv)
        return xhat

    def backward(self, dy, param_grads=True):
        xhat, inv = self._take_cache()
        mdy = dy.mean(axis=(2, 3), keepdims=True)
        mdyx = np.mean(dy * xhat, axis=(2, 3), keepdims=True)
        return inv * (dy - mdy - xhat * mdyx)

    def config(self):
        return {"kind": self.kind, "eps": self.eps}


class ReLU(Layer):
    kind = "relu"

    def forward(self, x):
        self._cache = x > 0
        return np.where(self._cache, x, 0.0)

    def backward(self, dy, param_grads=True):
        return np.where(self._take_cache(), dy, 0.0)


class LeakyReLU(Layer):
    kind = "leaky_relu"

    def __init__(self, slope: float = 0.2):
        super().__init__()
        self.slope = slope

    def forward(self, x):
        self._cache = x > 0
        return np.where(self._cache, x, self.slope * x)

    def backward(self, dy, param_grads=True):
        return np.where(self._take_cache(), dy, self.slope * dy)

    def config(self):
        return {"kind": self.kind, "slope": self.slope}


class Sigmoid(Layer):
    kind = "sigmoid"

    def forward(self, x):
        # split by sign so exp never overflows
        e = np.exp(-np.abs(x))
        y = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
        self._cache = y
        return y

    def backward(self, dy, param_grads=True):
        y = self._take_cache()
        return dy * y * (1.0 - y)


class Tanh(Layer):
    kind = "tanh"

    def forward(self, x):
        self._cache = np.tanh(x)
        return self._cache

    def backward(self, dy, param_grads=True):
        y = self._take_cache()
        return dy * (1.0 - y * y)


class GlobalMean(Layer):
    """Average over channels and space, giving one score per sample."""

    kind = "global_mean"

    def forward(self, x):
        self._cache = x.shape
        return x.mean(axis=(1, 2, 3))

    def backward(self, dy, param_grads=True):
        shape = self._take_cache()
        scale = 1.0 / (shape[1] * shape[2] * shape[3])
        return np.broadcast_to(dy[:, None, None, None] * scale, shape).copy()


class ResidualBlock(Layer):
    """``x + IN(conv3(relu(IN(conv3(x)))))``."""

    kind = "residual"

    def __init__(self, ch: int, rng: np.random.Generator | None = None, init_std: float = 0.02):
        super().__init__()
        self.ch = ch
        self.body = [
            Conv2d(ch, ch, 3, 1, 1, rng=rng, init_std=init_std),
            InstanceNorm(),
            ReLU(),
            Conv2d(ch, ch, 3, 1, 1, rng=rng, init_std=init_std),
            InstanceNorm(),
        ]

    def sublayers(self):
        return self.body

    def forward(self, x):
        y = x
        for layer in self.body:
            y = layer.forward(y)
        return x + y

    def backward(self, dy, param_grads=True):
        g = dy
        for layer in reversed(self.body):
            g = layer.backward(g, param_grads)
        return dy + g

    def config(self):
        return {"kind": self.kind, "ch": self.ch}
