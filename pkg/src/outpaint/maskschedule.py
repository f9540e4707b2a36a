"""Horizontally progressive mask schedule.

Training runs through ``total_steps`` stages; at each stage the centred,
full-height mask is a little wider, growing linearly in fraction of image
width from ``start_fraction`` to ``end_fraction``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ScheduleSpec", "mask_width_at_step", "mask_offset", "build_center_mask", "schedule",
           "schedule_records"]


@dataclass(frozen=True)
class ScheduleSpec:
    image_width: int
    image_height: int
    total_steps: int = 32
    start_fraction: float = 1.0 / 32.0
    end_fraction: float = 0.5

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError("total_steps must be at least 1")
        if not 0.0 < self.start_fraction <= self.end_fraction <= 1.0:
            raise ValueError("need 0 < start_fraction <= end_fraction <= 1")
        if self.image_width < 1 or self.image_height < 1:
            raise ValueError("image dimensions must be positive")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _check_step(spec: ScheduleSpec, step: int) -> None:
    if not 1 <= step <= spec.total_steps:
        raise ValueError(f"step {step} outside 1..{spec.total_steps}")


def mask_width_at_step(spec: ScheduleSpec, step: int) -> int:
    """Mask width in pixels at 1-based *step*."""
    _check_step(spec, step)
    # endpoints pinned exactly, independent of interpolation round-off
    if step == spec.total_steps:
        frac = spec.end_fraction
    elif step == 1:
        frac = spec.start_fraction
    else:
        delta = (spec.end_fraction - spec.start_fraction) / (spec.total_steps - 1)
        frac = spec.start_fraction + (step - 1) * delta
    return _round_half_up(spec.image_width * frac)


def mask_offset(spec: ScheduleSpec, step: int) -> int:
    return (spec.image_width - mask_width_at_step(spec, step)) // 2


def build_center_mask(spec: ScheduleSpec, step: int) -> np.ndarray:
    w = mask_width_at_step(spec, step)
    off = (spec.image_width - w) // 2
    m = np.zeros((spec.image_height, spec.image_width))
    m[:, off:off + w] = 1.0
    return m


def schedule(spec: ScheduleSpec) -> list[np.ndarray]:
    return [build_center_mask(spec, s) for s in range(1, spec.total_steps + 1)]


def schedule_records(spec: ScheduleSpec) -> list[dict]:
    """JSON-ready ``{step, width, offset}`` rows for every step."""
    return [
        {"step": s, "width": mask_width_at_step(spec, s), "offset": mask_offset(spec, s)}
        for s in range(1, spec.total_steps + 1)
    ]
