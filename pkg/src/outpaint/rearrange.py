"""Bidirectional boundary rearrangement.

Outpainting leaves both outer ends of the canvas unknown.  A circular
horizontal shift by half the canvas width moves those two strips into a
single centred block whose left neighbour is the input's right edge and
whose right neighbour is the input's left edge, so the generator solves an
inpainting problem with context on both sides.  The inverse shift puts the
result back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagecore import as_image, as_mask

__all__ = [
    "OutpaintCanvas",
    "shift_columns",
    "rearrange_forward",
    "rearrange_inverse",
    "make_outpaint_canvas",
    "known_offset",
]


@dataclass(frozen=True)
class OutpaintCanvas:
    image: np.ndarray       # (H, W_out, C)
    mask: np.ndarray        # (H, W_out), 1 on unknown columns
    known_width: int

    @property
    def width(self) -> int:
        return self.image.shape[1]

    @property
    def height(self) -> int:
        return self.image.shape[0]


def known_offset(out_width: int, known_width: int) -> int:
    """Left column of a horizontally centred block of ``known_width``."""
    return (out_width - known_width) // 2


def shift_columns(arr: np.ndarray, shift: int) -> np.ndarray:
    """Circular shift with ``out[:, x] = arr[:, (x + shift) % W]``."""
    return np.roll(arr, -shift, axis=1)


def rearrange_forward(canvas: OutpaintCanvas) -> OutpaintCanvas:
    s = canvas.width // 2
    return OutpaintCanvas(
        image=shift_columns(canvas.image, s),
        mask=shift_columns(canvas.mask, s),
        known_width=canvas.known_width,
    )


def rearrange_inverse(canvas: OutpaintCanvas) -> OutpaintCanvas:
    """Undo :func:`rearrange_forward`, including for odd widths."""
    w = canvas.width
    s = w - w // 2
    return OutpaintCanvas(
        image=shift_columns(canvas.image, s),
        mask=shift_columns(canvas.mask, s),
        known_width=canvas.known_width,
    )


def make_outpaint_canvas(image, out_width: int) -> OutpaintCanvas:
    """Embed *image* centred in a zero-filled canvas ``out_width`` wide.

    The returned mask is 1 exactly on the columns not covered by the input.
    """
    image = as_image(image)
    h, w_in, c = image.shape
    if out_width < w_in:
        raise ValueError(f"out_width {out_width} is smaller than input width {w_in}")
    off = known_offset(out_width, w_in)
    canvas = np.zeros((h, out_width, c))
    canvas[:, off:off + w_in] = image
    mask = np.ones((h, out_width))
    mask[:, off:off + w_in] = 0.0
    return OutpaintCanvas(image=canvas, mask=as_mask(mask), known_width=w_in)
