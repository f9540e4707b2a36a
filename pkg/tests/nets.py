"""Small networks and objectives shared by the gradient-check tests."""

import numpy as np

from outpaint import lossbank as lb
from outpaint.toynet.network import make_discriminator, make_feature_extractor, make_generator
from outpaint.toynet.objectives import (
    CompletionBatch,
    EdgeBatch,
    completion_d_step,
    completion_g_step,
    edge_d_step,
    edge_g_step,
)

H = W = 16
B = 2
GEN_WIDTHS = (4, 8)
DISC_WIDTHS = (4, 8, 8)
INIT_STD = 0.3


def _mask():
    m = np.zeros((B, 1, H, W))
    m[..., 4:12] = 1.0
    return m


def edge_setup(variant="hinge", seed=0):
    r = np.random.default_rng(seed)
    g = make_generator(3, 1, GEN_WIDTHS, 1, rng=r, init_std=INIT_STD)
    out = "linear" if variant == "hinge" else "sigmoid"
    d = make_discriminator(2, DISC_WIDTHS, out, rng=r, init_std=INIT_STD)
    edges = (r.random((B, 1, H, W)) > 0.8).astype(float)
    batch = EdgeBatch(r.random((B, 1, H, W)), edges, _mask())
    return g, d, batch


def completion_setup(seed=0):
    r = np.random.default_rng(seed)
    g = make_generator(4, 3, GEN_WIDTHS, 1, rng=r, role="completion_generator", init_std=INIT_STD)
    d = make_discriminator(4, DISC_WIDTHS, "sigmoid", rng=r, init_std=INIT_STD)
    ext = make_feature_extractor(3, (4, 4, 4), seed=7)
    batch = CompletionBatch(r.random((B, 3, H, W)), r.random((B, 1, H, W)), _mask())
    return g, d, ext, batch


def hinge_margin(d, e_pred_fn, batch):
    """Distance of the discriminator scores from their hinge margins."""
    def dist():
        e_pred = e_pred_fn()
        b = batch.gray.shape[0]
        x = np.concatenate([np.concatenate([batch.edges, batch.gray], axis=1),
                            np.concatenate([e_pred, batch.gray], axis=1)])
        s = d.forward(x)
        d._outputs = None
        return float(min(np.min(np.abs(1.0 - s[:b])), np.min(np.abs(1.0 + s[b:]))))
    return dist


def edge_g_objective(g, d, batch, variant="hinge", w=None):
    w = w or lb.LossWeights()

    def objective(backprop):
        return edge_g_step(g, d, batch, w, variant, backprop)[0]
    return objective


def edge_d_objective(g, d, batch, variant="hinge"):
    e_pred = g.forward(batch.generator_input())

    def objective(backprop):
        return edge_d_step(e_pred, d, batch, variant, backprop)
    return objective, e_pred


def completion_g_objective(g, d, ext, batch, w=None):
    w = w or lb.LossWeights()

    def objective(backprop):
        return completion_g_step(g, d, ext, batch, w, backprop)[0]
    return objective


def completion_d_objective(g, d, batch):
    i_pred = g.forward(batch.generator_input())

    def objective(backprop):
        return completion_d_step(i_pred, d, batch, backprop)
    return objective
