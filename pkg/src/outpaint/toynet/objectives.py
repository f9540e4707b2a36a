"""Forward + backward passes of the four adversarial objectives.

Each function evaluates one objective on a batch and, when ``backprop`` is
set, accumulates the gradients of that objective into the parameters of
the network being trained.  The opposing network's parameters are never
touched (its gradients are computed with ``param_grads=False``).

Batches hold ``(B, C, H, W)`` tensors; masks are ``(B, 1, H, W)`` with 1
on missing pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import lossbank as lb
from .network import ToyNetwork


@dataclass
class EdgeBatch:
    gray: np.ndarray    # (B, 1, H, W)
    edges: np.ndarray   # (B, 1, H, W), binary ground truth
    mask: np.ndarray    # (B, 1, H, W)

    def generator_input(self) -> np.ndarray:
        keep = 1.0 - self.mask
        return np.concatenate([self.gray * keep, self.edges * keep, self.mask], axis=1)


@dataclass
class CompletionBatch:
    image: np.ndarray       # (B, 3, H, W)
    edges_comp: np.ndarray  # (B, 1, H, W), composite edge map
    mask: np.ndarray        # (B, 1, H, W)

    def generator_input(self) -> np.ndarray:
        return np.concatenate([self.image * (1.0 - self.mask), self.edges_comp], axis=1)


def _adv_d(variant: str, real, fake):
    if variant == "hinge":
        return lb.hinge_d_loss(real, fake), lb.hinge_d_grad(real, fake)
    if variant == "nsgan":
        return lb.nsgan_d_loss(real, fake), lb.nsgan_d_grad(real, fake)
    raise ValueError(f"unknown loss variant {variant!r}")


def _adv_g(variant: str, fake):
    if variant == "hinge":
        return lb.hinge_g_loss(fake), lb.hinge_g_grad(fake)
    if variant == "nsgan":
        return lb.nsgan_g_loss(fake), lb.nsgan_g_grad(fake)
    raise ValueError(f"unknown loss variant {variant!r}")


# -- edge stage ------------------------------------------------------------------

def edge_d_step(e_pred: np.ndarray, d: ToyNetwork, batch: EdgeBatch, variant: str,
                backprop: bool = True) -> float:
    """Discriminator objective on real ``(E_gt, I_gray)`` vs fake ``(E_pred, I_gray)``."""
    b = batch.gray.shape[0]
    x = np.concatenate([
        np.concatenate([batch.edges, batch.gray], axis=1),
        np.concatenate([e_pred, batch.gray], axis=1),
    ])
    scores = d.forward(x)
    loss, (gr, gf) = _adv_d(variant, scores[:b], scores[b:])
    if backprop:
        d.backward(np.concatenate([gr, gf]))
    return loss


def edge_g_step(g: ToyNetwork, d: ToyNetwork, batch: EdgeBatch, w: lb.LossWeights,
                variant: str, backprop: bool = True):
    """Generator objective ``lambda_hinge * adv + lambda_fm * fm``.

    Returns ``(total, EdgeLossParts, e_pred)``.
    """
    e_pred = g.forward(batch.generator_input())
    b = e_pred.shape[0]
    x = np.concatenate([
        np.concatenate([batch.edges, batch.gray], axis=1),
        np.concatenate([e_pred, batch.gray], axis=1),
    ])
    scores = d.forward(x)
    feats = d.features()
    adv, g_adv = _adv_g(variant, scores[b:])
    real_f = [f[:b] for f in feats]
    fake_f = [f[b:] for f in feats]
    fm = lb.feature_matching_loss(real_f, fake_f)
    parts = lb.EdgeLossParts(adv, fm)
    total = lb.total_edge_loss(parts, w)
    if backprop:
        dscore = np.concatenate([np.zeros(b), w.lambda_hinge * g_adv])
        tap = [np.concatenate([np.zeros_like(gf), w.lambda_fm * gf])
               for gf in lb.feature_matching_grad(real_f, fake_f)]
        dx = d.backward(dscore, tap, param_grads=False)
        g.backward(dx[b:, :1])
    return total, parts, e_pred


# -- completion stage ----------------------------------------------------------

def completion_d_step(i_pred: np.ndarray, d: ToyNetwork, batch: CompletionBatch,
                      backprop: bool = True, variant: str = "nsgan") -> float:
    b = batch.image.shape[0]
    x = np.concatenate([
        np.concatenate([batch.image, batch.edges_comp], axis=1),
        np.concatenate([i_pred, batch.edges_comp], axis=1),
    ])
    scores = d.forward(x)
    loss, (gr, gf) = _adv_d(variant, scores[:b], scores[b:])
    if backprop:
        d.backward(np.concatenate([gr, gf]))
    return loss


def completion_g_step(g: ToyNetwork, d: ToyNetwork, extractor: ToyNetwork,
                      batch: CompletionBatch, w: lb.LossWeights, backprop: bool = True,
                      variant: str = "nsgan"):
    """Masked L1 + adversarial + perceptual + style objective.

    Returns ``(total, CompletionLossParts, i_pred)``.
    """
    i_pred = g.forward(batch.generator_input())
    b = i_pred.shape[0]
    l1 = lb.l1_masked_loss(i_pred, batch.image, batch.mask)

    x = np.concatenate([
        np.concatenate([batch.image, batch.edges_comp], axis=1),
        np.concatenate([i_pred, batch.edges_comp], axis=1),
    ])
    scores = d.forward(x)
    adv, g_adv = _adv_g(variant, scores[b:])

    extractor.forward(np.concatenate([batch.image, i_pred]))
    feats = extractor.features()
    gt_f = [f[:b] for f in feats]
    pred_f = [f[b:] for f in feats]
    perc = lb.perceptual_loss(pred_f, gt_f)
    style = lb.style_loss(pred_f, gt_f)
    parts = lb.CompletionLossParts(l1, adv, perc, style)
    total = lb.total_completion_loss(parts, w)

    if backprop:
        grad = w.lambda_l1 * lb.l1_masked_grad(i_pred, batch.image, batch.mask)
        dscore = np.concatenate([np.zeros(b), w.lambda_adv * g_adv])
        grad = grad + d.backward(dscore, param_grads=False)[b:, :3]
        taps = [np.concatenate([np.zeros_like(pg), w.lambda_perc * pg + w.lambda_style * sg])
                for pg, sg in zip(lb.perceptual_grad(pred_f, gt_f), lb.style_grad(pred_f, gt_f))]
        grad = grad + extractor.backward(None, taps, param_grads=False)[b:]
        g.backward(grad)
    return total, parts, i_pred
