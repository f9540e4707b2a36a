"""Training objectives for the edge and completion stages.

Every loss is a pure function returning a Python float.  The ``*_grad``
companions return the analytic (sub)gradient with respect to the
generated-side argument(s), in the same shapes, so the trainers can
backpropagate without an autodiff engine.

Activation stacks are plain sequences of arrays.  A leading batch axis is
allowed; per-layer normalisers are then per-sample element counts, which
makes every loss an average over the batch.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import NamedTuple, Sequence

import numpy as np

PROB_EPS = 1e-7


@dataclass(frozen=True)
class LossWeights:
    lambda_l1: float = 1.0
    lambda_adv: float = 0.2
    lambda_perc: float = 0.1
    lambda_style: float = 250.0
    lambda_hinge: float = 1.0
    lambda_fm: float = 10.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")


class EdgeLossParts(NamedTuple):
    adv: float
    fm: float


class CompletionLossParts(NamedTuple):
    l1: float
    adv: float
    perc: float
    style: float


def _scores(x, name="scores") -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.size == 0:
        raise ValueError(f"{name} must be nonempty")
    return a


def _probs(x, name="probs") -> np.ndarray:
    a = _scores(x, name)
    if not np.all((a >= 0.0) & (a <= 1.0)):
        raise ValueError(f"{name} must lie in [0, 1]")
    return np.clip(a, PROB_EPS, 1.0 - PROB_EPS)


def _prob_clip_gate(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    return ((a > PROB_EPS) & (a < 1.0 - PROB_EPS)).astype(np.float64)


# -- adversarial terms -------------------------------------------------------

def hinge_g_loss(fake_scores) -> float:
    return float(-np.mean(_scores(fake_scores)))


def hinge_g_grad(fake_scores) -> np.ndarray:
    s = _scores(fake_scores)
    return np.full_like(s, -1.0 / s.size)


def hinge_d_loss(real_scores, fake_scores) -> float:
    r = _scores(real_scores, "real_scores")
    f = _scores(fake_scores, "fake_scores")
    return float(np.mean(np.maximum(0.0, 1.0 - r)) + np.mean(np.maximum(0.0, 1.0 + f)))


def hinge_d_grad(real_scores, fake_scores):
    """Gradients ``(d/d real, d/d fake)``; zero on the flat side of each hinge."""
    r = _scores(real_scores, "real_scores")
    f = _scores(fake_scores, "fake_scores")
    gr = np.where(1.0 - r > 0.0, -1.0 / r.size, 0.0)
    gf = np.where(1.0 + f > 0.0, 1.0 / f.size, 0.0)
    return gr, gf


def nsgan_g_loss(fake_probs) -> float:
    """Non-saturating generator loss ``-mean(log D(fake))``."""
    p = _probs(fake_probs, "fake_probs")
    return float(-np.mean(np.log(p)))


def nsgan_g_grad(fake_probs) -> np.ndarray:
    p = _probs(fake_probs, "fake_probs")
    return -_prob_clip_gate(fake_probs) / (p * p.size)


def nsgan_d_loss(real_probs, fake_probs) -> float:
    r = _probs(real_probs, "real_probs")
    f = _probs(fake_probs, "fake_probs")
    return float(-np.mean(np.log(r)) - np.mean(np.log(1.0 - f)))


def nsgan_d_grad(real_probs, fake_probs):
    r = _probs(real_probs, "real_probs")
    f = _probs(fake_probs, "fake_probs")
    gr = -_prob_clip_gate(real_probs) / (r * r.size)
    gf = _prob_clip_gate(fake_probs) / ((1.0 - f) * f.size)
    return gr, gf


# -- activation-space distances ---------------------------------------------

def _check_stacks(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise ValueError(f"stacks have {len(a)} and {len(b)} layers")
    for i, (x, y) in enumerate(zip(a, b)):
        if np.shape(x) != np.shape(y):
            raise ValueError(f"layer {i}: shapes {np.shape(x)} and {np.shape(y)} differ")
        if np.size(x) == 0:
            raise ValueError(f"layer {i} is empty")


def _mean_abs_stack(ref_acts, gen_acts) -> float:
    _check_stacks(ref_acts, gen_acts)
    return float(sum(np.mean(np.abs(np.asarray(r) - np.asarray(g)))
                     for r, g in zip(ref_acts, gen_acts)))


def _mean_abs_stack_grad(ref_acts, gen_acts) -> list[np.ndarray]:
    _check_stacks(ref_acts, gen_acts)
    out = []
    for r, g in zip(ref_acts, gen_acts):
        d = np.asarray(g, dtype=np.float64) - np.asarray(r, dtype=np.float64)
        out.append(np.sign(d) / d.size)
    return out


def feature_matching_loss(real_acts, fake_acts) -> float:
    """``sum_i (1/N_i) ||real_i - fake_i||_1`` over discriminator layers."""
    return _mean_abs_stack(real_acts, fake_acts)


def feature_matching_grad(real_acts, fake_acts) -> list[np.ndarray]:
    return _mean_abs_stack_grad(real_acts, fake_acts)


def perceptual_loss(pred_acts, gt_acts) -> float:
    return _mean_abs_stack(gt_acts, pred_acts)


def perceptual_grad(pred_acts, gt_acts) -> list[np.ndarray]:
    return _mean_abs_stack_grad(gt_acts, pred_acts)


# -- reconstruction ----------------------------------------------------------

def _broadcast_mask(pred: np.ndarray, m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    # an (H, W) mask against an (H, W, C) image gets a trailing channel axis
    if m.ndim == pred.ndim - 1 and m.shape == pred.shape[:-1]:
        m = m[..., None]
    try:
        return np.broadcast_to(m, pred.shape)
    except ValueError as exc:
        raise ValueError(f"mask shape {m.shape} incompatible with {pred.shape}") from exc


def l1_masked_loss(pred, gt, m) -> float:
    """Mean absolute error over the missing region only.

    Normalised by ``sum(M) * channels`` so the value does not depend on how
    large the mask is.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shapes differ: {pred.shape} vs {gt.shape}")
    mm = _broadcast_mask(pred, m)
    denom = mm.sum()
    if denom <= 0:
        raise ValueError("mask is empty")
    return float(np.sum(np.abs(pred - gt) * mm) / denom)


def l1_masked_grad(pred, gt, m) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    mm = _broadcast_mask(pred, m)
    denom = mm.sum()
    if denom <= 0:
        raise ValueError("mask is empty")
    return np.sign(pred - gt) * mm / denom


# -- style ---------------------------------------------------------------------

def gram_matrix(features) -> np.ndarray:
    """``F F^T / (C H W)`` for a ``(C, H, W)`` map, batched over a leading axis."""
    f = np.asarray(features, dtype=np.float64)
    c, h, w = f.shape[-3:]
    if h * w == 0:
        raise ValueError("feature map has no spatial extent")
    flat = f.reshape(f.shape[:-3] + (c, h * w))
    return flat @ np.swapaxes(flat, -1, -2) / (c * h * w)


def style_loss(pred_acts, gt_acts) -> float:
    """Mean over layers (and batch) of the entrywise L1 between Gram matrices."""
    _check_stacks(pred_acts, gt_acts)
    total = 0.0
    for p, g in zip(pred_acts, gt_acts):
        diff = np.abs(gram_matrix(p) - gram_matrix(g))
        total += float(np.mean(np.sum(diff, axis=(-1, -2))))
    return total / len(pred_acts)


def style_grad(pred_acts, gt_acts) -> list[np.ndarray]:
    _check_stacks(pred_acts, gt_acts)
    out = []
    n_layers = len(pred_acts)
    for p, g in zip(pred_acts, gt_acts):
        p = np.asarray(p, dtype=np.float64)
        c, h, w = p.shape[-3:]
        batch = int(np.prod(p.shape[:-3], dtype=np.int64))
        s = np.sign(gram_matrix(p) - gram_matrix(g))
        flat = p.reshape(p.shape[:-3] + (c, h * w))
        d = (s + np.swapaxes(s, -1, -2)) @ flat / (c * h * w)
        out.append(d.reshape(p.shape) / (batch * n_layers))
    return out


# -- weighted totals -----------------------------------------------------------

def total_edge_loss(parts, w: LossWeights | None = None) -> float:
    w = w or LossWeights()
    adv, fm = parts
    return w.lambda_hinge * adv + w.lambda_fm * fm


def total_completion_loss(parts, w: LossWeights | None = None) -> float:
    w = w or LossWeights()
    l1, adv, perc, style = parts
    return (w.lambda_l1 * l1 + w.lambda_adv * adv
            + w.lambda_perc * perc + w.lambda_style * style)
