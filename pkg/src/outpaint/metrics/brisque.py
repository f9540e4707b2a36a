"""BRISQUE natural-scene-statistics features and RBF-SVR scoring.

Per scale (full resolution, then 2x2 mean-pooled):

* MSCN coefficients ``(I - mu) / (sigma + C)`` with a 7x7 Gaussian window
  (sigma 7/6) and ``C = 1/255`` on unit-range intensities;
* a generalised Gaussian fit ``(alpha, sigma^2)`` of the MSCN map;
* asymmetric generalised Gaussian fits ``(alpha, mean, sigma_l^2,
  sigma_r^2)`` of the horizontal, vertical and two diagonal neighbour
  products.

That is 18 features per scale and 36 in total.  Shape parameters are
solved by moment matching and clipped to ``[0.2, 10]``; scale
parameters are floored at ``1e-6``.  An all-zero input (e.g. the MSCN map
of a flat image) gets the Gaussian shape ``alpha = 2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from ..filters import correlate1d, gaussian_window

N_FEATURES = 36
MSCN_WINDOW = 7
MSCN_SIGMA = 7.0 / 6.0
MSCN_C = 1.0 / 255.0
ALPHA_MIN, ALPHA_MAX = 0.2, 10.0
SIGMA_FLOOR = 1e-6
DEGENERATE_ALPHA = 2.0
MIN_SIDE = 16

# (name, row offset, column offset) of the paired neighbour
PRODUCTS = (("H", 0, 1), ("V", 1, 0), ("D1", 1, 1), ("D2", 1, -1))


def _ggd_ratio(alpha):
    # Gamma(1/a) Gamma(3/a) / Gamma(2/a)^2, decreasing in a
    return np.exp(gammaln(1.0 / alpha) + gammaln(3.0 / alpha) - 2.0 * gammaln(2.0 / alpha))


def _solve_shape(f, target: float) -> float:
    """Root of monotone ``f(alpha) = target`` clipped to the shape range."""
    lo, hi = f(ALPHA_MIN) - target, f(ALPHA_MAX) - target
    if lo * hi > 0:
        return ALPHA_MIN if abs(lo) < abs(hi) else ALPHA_MAX
    return float(brentq(lambda a: f(a) - target, ALPHA_MIN, ALPHA_MAX, xtol=1e-12))


def fit_ggd(x) -> tuple[float, float]:
    """Moment-matching generalised Gaussian fit; returns ``(alpha, sigma^2)``."""
    x = np.ravel(np.asarray(x, dtype=np.float64))
    m2 = float(np.mean(x * x))
    m1 = float(np.mean(np.abs(x)))
    if m2 < SIGMA_FLOOR ** 2 or m1 == 0.0:
        return DEGENERATE_ALPHA, SIGMA_FLOOR ** 2
    alpha = _solve_shape(_ggd_ratio, m2 / (m1 * m1))
    return alpha, m2


def _aggd_ratio(alpha):
    # Gamma(2/a)^2 / (Gamma(1/a) Gamma(3/a)), increasing in a
    return 1.0 / _ggd_ratio(alpha)


def fit_aggd(x) -> tuple[float, float, float, float]:
    """Asymmetric GGD fit; returns ``(alpha, mean, sigma_l^2, sigma_r^2)``."""
    x = np.ravel(np.asarray(x, dtype=np.float64))
    neg, pos = x[x < 0], x[x > 0]
    sl = max(float(np.sqrt(np.mean(neg * neg))) if neg.size else 0.0, SIGMA_FLOOR)
    sr = max(float(np.sqrt(np.mean(pos * pos))) if pos.size else 0.0, SIGMA_FLOOR)
    m2 = float(np.mean(x * x))
    m1 = float(np.mean(np.abs(x)))
    if m2 < SIGMA_FLOOR ** 2 or m1 == 0.0:
        alpha = DEGENERATE_ALPHA
    else:
        g = sl / sr
        r_hat = m1 * m1 / m2
        big_r = r_hat * (g ** 3 + 1.0) * (g + 1.0) / (g * g + 1.0) ** 2
        alpha = _solve_shape(_aggd_ratio, big_r)
    # mean = (beta_r - beta_l) Gamma(2/a) / Gamma(1/a), beta = s sqrt(G(1/a)/G(3/a))
    scale = np.exp(0.5 * (gammaln(1.0 / alpha) - gammaln(3.0 / alpha)))
    mean = (sr - sl) * scale * np.exp(gammaln(2.0 / alpha) - gammaln(1.0 / alpha))
    return alpha, float(mean), sl * sl, sr * sr


def mscn(img) -> np.ndarray:
    """Mean-subtracted contrast-normalised coefficients of a 2-D image."""
    x = np.asarray(img, dtype=np.float64)
    k = gaussian_window(MSCN_WINDOW, MSCN_SIGMA)
    mu = correlate1d(correlate1d(x, k, 0), k, 1)
    var = correlate1d(correlate1d(x * x, k, 0), k, 1) - mu * mu
    sigma = np.sqrt(np.abs(var))
    return (x - mu) / (sigma + MSCN_C)


def neighbour_products(c: np.ndarray) -> dict[str, np.ndarray]:
    h, w = c.shape
    out = {}
    for name, dr, dc in PRODUCTS:
        c0 = max(0, -dc)
        c1 = w - max(0, dc)
        a = c[0:h - dr, c0:c1]
        b = c[dr:h, c0 + dc:c1 + dc]
        out[name] = a * b
    return out


def _scale_features(x: np.ndarray) -> list[float]:
    c = mscn(x)
    feats = list(fit_ggd(c))
    prods = neighbour_products(c)
    for name, _, _ in PRODUCTS:
        feats.extend(fit_aggd(prods[name]))
    return feats


def _half(x: np.ndarray) -> np.ndarray:
    h, w = (x.shape[0] // 2) * 2, (x.shape[1] // 2) * 2
    x = x[:h, :w]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def brisque_features(img) -> np.ndarray:
    """36-element BRISQUE feature vector of a single-channel image."""
    x = np.asarray(img, dtype=np.float64)
    if x.ndim == 3 and x.shape[2] == 1:
        x = x[:, :, 0]
    if x.ndim != 2:
        raise ValueError(f"expected a single-channel image, got shape {x.shape}")
    if min(x.shape) < MIN_SIDE:
        raise ValueError(f"image {x.shape} too small for BRISQUE (need >= {MIN_SIDE} per side)")
    feats = _scale_features(x) + _scale_features(_half(x))
    return np.asarray(feats)


def flip_permutation() -> np.ndarray:
    """Feature index map under a horizontal flip (D1 and D2 swap)."""
    perm = list(range(N_FEATURES))
    for base in (0, 18):
        d1 = base + 2 + 4 * 2
        d2 = base + 2 + 4 * 3
        for k in range(4):
            perm[d1 + k], perm[d2 + k] = d2 + k, d1 + k
    return np.asarray(perm)


@dataclass
class BrisqueModel:
    feature_ranges: np.ndarray    # (36, 2) min, max
    support_vectors: np.ndarray   # (M, 36)
    dual_coeffs: np.ndarray       # (M,)
    rbf_gamma: float
    intercept: float

    def __post_init__(self):
        self.feature_ranges = np.asarray(self.feature_ranges, dtype=np.float64)
        self.support_vectors = np.atleast_2d(np.asarray(self.support_vectors, dtype=np.float64))
        self.dual_coeffs = np.ravel(np.asarray(self.dual_coeffs, dtype=np.float64))
        if self.feature_ranges.shape != (N_FEATURES, 2):
            raise ValueError("feature_ranges must be 36 x 2")
        if not np.all(self.feature_ranges[:, 0] < self.feature_ranges[:, 1]):
            raise ValueError("every feature range needs min < max")
        if self.support_vectors.shape[1] != N_FEATURES:
            raise ValueError("support vectors must have 36 columns")
        if self.support_vectors.shape[0] != self.dual_coeffs.shape[0]:
            raise ValueError("one dual coefficient per support vector")
        arrays = (self.feature_ranges, self.support_vectors, self.dual_coeffs)
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("model contains non-finite values")
        if not (np.isfinite(self.rbf_gamma) and np.isfinite(self.intercept)):
            raise ValueError("model contains non-finite values")

    @classmethod
    def from_json(cls, path) -> "BrisqueModel":
        d = json.loads(Path(path).read_text())
        return cls(d["feature_ranges"], d["support_vectors"], d["dual_coeffs"],
                   float(d["rbf_gamma"]), float(d["intercept"]))

    def to_json(self, path) -> None:
        d = {
            "feature_ranges": self.feature_ranges.tolist(),
            "support_vectors": self.support_vectors.tolist(),
            "dual_coeffs": self.dual_coeffs.tolist(),
            "rbf_gamma": self.rbf_gamma,
            "intercept": self.intercept,
        }
        Path(path).write_text(json.dumps(d))


def scale_features(features, model: BrisqueModel) -> np.ndarray:
    lo, hi = model.feature_ranges[:, 0], model.feature_ranges[:, 1]
    return 2.0 * (np.asarray(features, dtype=np.float64) - lo) / (hi - lo) - 1.0


def brisque_score(features, model: BrisqueModel) -> float:
    """RBF-SVR quality score of a feature vector; lower means more natural."""
    f = np.ravel(np.asarray(features, dtype=np.float64))
    if f.shape != (N_FEATURES,):
        raise ValueError(f"expected {N_FEATURES} features, got {f.size}")
    x = scale_features(f, model)
    d2 = np.sum((model.support_vectors - x) ** 2, axis=1)
    with np.errstate(over="ignore"):
        k = np.exp(-model.rbf_gamma * d2)
    return float(np.dot(model.dual_coeffs, k) + model.intercept)
