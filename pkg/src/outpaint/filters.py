"""Small separable filtering helpers shared by the edge and metric code."""

from __future__ import annotations

import math

import numpy as np


def correlate1d(a: np.ndarray, k: np.ndarray, axis: int) -> np.ndarray:
    """Same-size 1-D correlation with symmetric (edge-including) padding."""
    r = len(k) // 2
    pad = [(0, 0)] * a.ndim
    pad[axis] = (r, r)
    p = np.pad(a, pad, mode="symmetric")
    n = a.shape[axis]
    out = np.zeros_like(a, dtype=np.float64)
    for i, kv in enumerate(k):
        if kv != 0.0:
            out += kv * np.take(p, np.arange(i, i + n), axis=axis)
    return out


def correlate1d_valid(a: np.ndarray, k: np.ndarray, axis: int) -> np.ndarray:
    """1-D correlation keeping only fully-overlapping positions."""
    n = a.shape[axis] - len(k) + 1
    if n < 1:
        raise ValueError("signal shorter than kernel")
    out = np.zeros(a.shape[:axis] + (n,) + a.shape[axis + 1:])
    for i, kv in enumerate(k):
        out += kv * np.take(a, np.arange(i, i + n), axis=axis)
    return out


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    """Normalised 1-D Gaussian with *size* taps centred on the middle one."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Sampled Gaussian of radius ``ceil(3 sigma)``, normalised to sum 1."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    r = int(math.ceil(3.0 * sigma))
    return gaussian_window(2 * r + 1, sigma)
