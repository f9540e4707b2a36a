"""Distribution-level scores from externally computed embeddings.

No classifier is bundled: FID consumes feature vectors and the Inception
Score consumes class-probability rows produced elsewhere.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SYMMETRY_TOL = 1e-9
NEG_EIG_TOL = 1e-9


@dataclass
class FeatureSet:
    vectors: np.ndarray
    source_tag: str = ""
    ids: list | None = None

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=np.float64))
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("feature vectors must be finite")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def load_feature_csv(path, source_tag: str | None = None) -> FeatureSet:
    """Read ``id,f0,...,fD-1`` rows into a :class:`FeatureSet`."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "id" or len(header) < 2:
            raise ValueError(f"{path}: header must start with 'id' followed by feature columns")
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    if not rows:
        raise ValueError(f"{path}: no feature rows")
    return FeatureSet(np.asarray(rows), source_tag or path.stem, ids)


def save_feature_csv(fs: FeatureSet, path) -> None:
    ids = fs.ids or [str(i) for i in range(fs.vectors.shape[0])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + [f"f{j}" for j in range(fs.dim)])
        for i, row in zip(ids, fs.vectors):
            w.writerow([i] + [repr(float(v)) for v in row])


def matrix_sqrt_psd(s) -> np.ndarray:
    """Principal square root of a symmetric positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0]`` are clamped to zero, where ``tol`` is
    ``1e-9`` times ``max(1, largest |eigenvalue|)``; anything more negative
    is reported as an indefinite matrix.
    """
    s = np.atleast_2d(np.asarray(s, dtype=np.float64))
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {s.shape}")
    scale = max(1.0, float(np.max(np.abs(s))) if s.size else 1.0)
    if np.max(np.abs(s - s.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    lam, vec = np.linalg.eigh(0.5 * (s + s.T))
    tol = NEG_EIG_TOL * max(1.0, float(np.max(np.abs(lam), initial=0.0)))
    if lam.size and lam.min() < -tol:
        raise ValueError(f"matrix is indefinite (eigenvalue {lam.min():.3e})")
    lam = np.clip(lam, 0.0, None)
    return (vec * np.sqrt(lam)) @ vec.T


def _as_vectors(x) -> np.ndarray:
    if isinstance(x, FeatureSet):
        return x.vectors
    return np.atleast_2d(np.asarray(x, dtype=np.float64))


def fid_from_features(real, gen) -> float:
    """Frechet distance between Gaussian fits of two feature sets.

    ``|mu1 - mu2|^2 + Tr(S1 + S2 - 2 sqrt(S1^1/2 S2 S1^1/2))`` with unbiased
    covariances.  The symmetric inner product keeps every square root on a
    PSD matrix.
    """
    a, b = _as_vectors(real), _as_vectors(gen)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"feature dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise ValueError("need at least two vectors per set")
    mu1, mu2 = a.mean(axis=0), b.mean(axis=0)
    s1 = np.atleast_2d(np.cov(a, rowvar=False))
    s2 = np.atleast_2d(np.cov(b, rowvar=False))
    r1 = matrix_sqrt_psd(s1)
    inner = r1 @ s2 @ r1
    cross = np.trace(matrix_sqrt_psd(0.5 * (inner + inner.T)))
    diff = mu1 - mu2
    value = float(diff @ diff + np.trace(s1) + np.trace(s2) - 2.0 * cross)
    return max(value, 0.0)


def inception_score_from_probs(probs) -> float:
    """``exp(mean_n KL(p(y|x_n) || p(y)))`` from ``N x K`` probability rows."""
    p = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    if p.ndim != 2 or p.size == 0:
        raise ValueError("expected a nonempty N x K matrix")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("probabilities must be finite and non-negative")
    if np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-6:
        raise ValueError("each row must sum to 1")
    marginal = p.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * (np.log(p) - np.log(marginal)), 0.0)
    kl = terms.sum(axis=1)
    return float(math.exp(kl.mean()))
