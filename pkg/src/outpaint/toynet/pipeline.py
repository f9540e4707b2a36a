"""Outpainting inference with a trained edge / completion generator pair."""

from __future__ import annotations

import numpy as np

from ..edgemap import CannyParams, composite_edge_map, image_edges
from ..imagecore import as_image, compose_masked, to_grayscale
from ..rearrange import OutpaintCanvas, make_outpaint_canvas, rearrange_forward, rearrange_inverse
from .network import ToyNetwork


def _check_net(net: ToyNetwork, role: str) -> None:
    if net.role != role:
        raise ValueError(f"expected a {role}, got {net.role}")
    if net.is_all_zero():
        raise ValueError(f"{role} has all-zero weights; load a trained checkpoint")


def _nchw(x: np.ndarray) -> np.ndarray:
    return x.transpose(2, 0, 1)[None]


def infer_outpaint(edge_gen: ToyNetwork, completion_gen: ToyNetwork, image, out_width: int,
                   canny: CannyParams | None = None) -> np.ndarray:
    """Extend *image* to ``out_width`` columns, half on each side.

    The canvas is rearranged so both unknown strips form one centred gap,
    the gap is filled edges-first and the result is shifted back.  Known
    pixels are copied through unchanged.  When ``out_width`` equals the
    input width the input is returned as is and the nets are not run.
    """
    image = as_image(image)
    h, w_in, c = image.shape
    if out_width == w_in:
        return image.copy()
    _check_net(edge_gen, "edge_generator")
    _check_net(completion_gen, "completion_generator")
    if h % 4 or out_width % 4:
        raise ValueError(f"canvas {out_width}x{h} must have both sides divisible by 4")

    rgb = np.repeat(image, 3, axis=2) if c == 1 else image
    canvas = make_outpaint_canvas(rgb, out_width)
    edge_canvas = make_outpaint_canvas(image_edges(rgb, canny)[:, :, None], out_width)
    work = rearrange_forward(canvas)
    edges = rearrange_forward(edge_canvas).image[:, :, 0]

    m = work.mask
    keep = 1.0 - m
    gray = to_grayscale(work.image)[:, :, 0]
    ge_in = np.stack([gray * keep, edges * keep, m])[None]
    e_pred = edge_gen.forward(ge_in)[0, 0]
    e_comp = composite_edge_map(edges, e_pred, m)

    gc_in = np.concatenate([_nchw(work.image * keep[:, :, None]), e_comp[None, None]], axis=1)
    i_pred = completion_gen.forward(gc_in)[0].transpose(1, 2, 0)
    filled = compose_masked(work.image, i_pred, m)

    out = rearrange_inverse(OutpaintCanvas(filled, m, work.known_width)).image
    return out[:, :, :1] if c == 1 else out


def zero_fill_outpaint(image, out_width: int) -> np.ndarray:
    """Baseline: the input centred on a black canvas."""
    return make_outpaint_canvas(image, out_width).image


def seam_discontinuity(img, known_width: int) -> float:
    """Mean absolute column jump across the seams of a horizontal panorama.

    Three seams are averaged: the wrap-around seam between the last and
    first columns and the two boundaries between the centred known block
    and the generated strips.
    """
    img = as_image(img)
    w = img.shape[1]
    off = (w - known_width) // 2
    pairs = [(w - 1, 0)]
    if known_width < w:
        pairs += [(off - 1, off), (off + known_width - 1, off + known_width)]
    jumps = [np.mean(np.abs(img[:, a] - img[:, b])) for a, b in pairs]
    return float(np.mean(jumps))
