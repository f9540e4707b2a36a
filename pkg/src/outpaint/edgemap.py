"""Canny edge extraction, edge compositing and edge F1.

All filtering uses symmetric (edge-including) reflection at the borders so
that a flat image never produces border gradients.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .filters import correlate1d as _correlate1d
from .filters import gaussian_kernel1d
from .imagecore import compose_masked, to_grayscale

__all__ = [
    "CannyParams",
    "gaussian_kernel1d",
    "gaussian_smooth",
    "sobel_gradients",
    "non_max_suppression",
    "hysteresis",
    "canny_edges",
    "image_edges",
    "composite_edge_map",
    "edge_f1",
]


@dataclass(frozen=True)
class CannyParams:
    gaussian_sigma: float = 2.0
    low_threshold: float = 0.1
    high_threshold: float = 0.2

    def __post_init__(self):
        if not self.gaussian_sigma > 0:
            raise ValueError("gaussian_sigma must be positive")
        if not 0.0 < self.low_threshold <= self.high_threshold <= 1.0:
            raise ValueError("need 0 < low_threshold <= high_threshold <= 1")


def _plane(img) -> np.ndarray:
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 3:
        if a.shape[2] != 1:
            raise ValueError(f"expected a single-channel image, got shape {a.shape}")
        a = a[:, :, 0]
    if a.ndim != 2:
        raise ValueError(f"expected a single-channel image, got shape {a.shape}")
    return a


def gaussian_smooth(img, sigma: float) -> np.ndarray:
    """Separable Gaussian blur; output has the same shape as *img*."""
    k = gaussian_kernel1d(sigma)
    a = _plane(img)
    out = _correlate1d(_correlate1d(a, k, 0), k, 1)
    return out.reshape(np.shape(img))


_SOBEL_SMOOTH = np.array([1.0, 2.0, 1.0])
_SOBEL_DIFF = np.array([-1.0, 0.0, 1.0])


def sobel_gradients(img):
    """3x3 Sobel derivatives.

    Returns ``(gx, gy, magnitude, orientation)`` as ``(H, W)`` arrays, with
    ``gy`` positive downwards (increasing row index) and orientation from
    ``arctan2(gy, gx)`` in radians.
    """
    a = _plane(img)
    gx = _correlate1d(_correlate1d(a, _SOBEL_DIFF, 1), _SOBEL_SMOOTH, 0)
    gy = _correlate1d(_correlate1d(a, _SOBEL_DIFF, 0), _SOBEL_SMOOTH, 1)
    mag = np.hypot(gx, gy)
    theta = np.arctan2(gy, gx)
    return gx, gy, mag, theta


# neighbour offsets (drow, dcol) along the gradient for each quantised angle
_NMS_OFFSETS = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}


def non_max_suppression(mag: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Thin ridges to one pixel across the gradient direction.

    Orientation is quantised to 0, 45, 90 and 135 degrees.  Ties are broken
    asymmetrically (strict on the negative side) so a symmetric ridge keeps
    exactly one of its two equal pixels.
    """
    h, w = mag.shape
    deg = np.rad2deg(theta) % 180.0
    sector = (np.floor((deg + 22.5) / 45.0).astype(int)) % 4
    p = np.pad(mag, 1, mode="symmetric")
    out = np.zeros_like(mag)
    for s, (dr, dc) in _NMS_OFFSETS.items():
        fwd = p[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        bwd = p[1 - dr:1 - dr + h, 1 - dc:1 - dc + w]
        keep = (sector == s) & (mag > bwd) & (mag >= fwd)
        out[keep] = mag[keep]
    return out


def hysteresis(nms: np.ndarray, low: float, high: float) -> np.ndarray:
    """Keep strong pixels and every weak pixel 8-connected to one."""
    h, w = nms.shape
    strong = nms >= high
    weak = nms >= low
    out = np.zeros((h, w), dtype=bool)
    work = deque(zip(*np.nonzero(strong)))
    for r, c in work:
        out[r, c] = True
    while work:
        r, c = work.popleft()
        for dr in (-1, 0, 1):
            rr = r + dr
            if rr < 0 or rr >= h:
                continue
            for dc in (-1, 0, 1):
                cc = c + dc
                if 0 <= cc < w and weak[rr, cc] and not out[rr, cc]:
                    out[rr, cc] = True
                    work.append((rr, cc))
    return out


def canny_edges(img, params: CannyParams | None = None) -> np.ndarray:
    """Binary ``(H, W)`` Canny edge map of a single-channel image.

    Thresholds are fractions of the maximum smoothed gradient magnitude.
    """
    params = params or CannyParams()
    a = _plane(img)
    smooth = gaussian_smooth(a, params.gaussian_sigma)
    _, _, mag, theta = sobel_gradients(smooth)
    peak = mag.max()
    if peak <= 0.0:
        return np.zeros_like(a)
    thin = non_max_suppression(mag, theta)
    edges = hysteresis(thin, params.low_threshold * peak, params.high_threshold * peak)
    return edges.astype(np.float64)


def image_edges(img, params: CannyParams | None = None) -> np.ndarray:
    """Canny edges of an ``(H, W, C)`` image, converting RGB to luma first."""
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 3 and a.shape[2] == 3:
        a = to_grayscale(a)
    return canny_edges(a, params)


def composite_edge_map(e_gt, e_pred, m) -> np.ndarray:
    """Ground-truth edges on known pixels, predicted edges on missing ones."""
    return compose_masked(_plane(e_gt), _plane(e_pred), m)


def edge_f1(pred, gt, threshold: float = 0.5, region=None):
    """Pixel-exact precision, recall and F1 of edge maps.

    *pred* is binarised with ``pred >= threshold`` and *gt* with
    ``gt >= 0.5``.  When *region* is given (an ``(H, W)`` 0/1 map) only
    pixels where it is 1 are scored.  Two empty maps score ``(1, 1, 1)``.
    """
    p = _plane(pred) >= threshold
    g = _plane(gt) >= 0.5
    if p.shape != g.shape:
        raise ValueError(f"shapes differ: {p.shape} vs {g.shape}")
    if region is not None:
        sel = np.asarray(region) > 0.5
        p, g = p[sel], g[sel]
    tp = int(np.sum(p & g))
    n_pred = int(np.sum(p))
    n_gt = int(np.sum(g))
    if n_pred == 0 and n_gt == 0:
        return 1.0, 1.0, 1.0
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gt if n_gt else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2.0 * precision * recall / (precision + recall)
