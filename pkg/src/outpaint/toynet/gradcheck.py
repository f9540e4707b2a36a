"""Central finite-difference verification of analytic parameter gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .network import ToyNetwork


@dataclass
class GradCheckReport:
    max_rel_error: float
    n_checked: int
    n_skipped: int
    worst: str
    tol: float

    @property
    def passed(self) -> bool:
        return self.n_checked > 0 and self.max_rel_error < self.tol

    def as_dict(self) -> dict:
        return {"max_rel_error": self.max_rel_error, "n_checked": self.n_checked,
                "n_skipped": self.n_skipped, "worst": self.worst, "tol": self.tol,
                "passed": self.passed}


def relative_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    """``|a - n| / max(|a|, |n|, floor)``."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def gradient_check(net: ToyNetwork, objective: Callable[[bool], float], tol: float = 1e-4,
                   h: float = 1e-5, kink: Callable[[], float] | None = None,
                   kink_guard: float = 1e-3, floor: float = 1e-6) -> GradCheckReport:
    """Compare analytic and central-difference gradients for every parameter.

    *objective(backprop)* must evaluate the scalar loss and, when
    ``backprop`` is true, accumulate its gradient into *net*.  *kink*, when
    given, returns the distance of the current state from the nearest
    non-differentiable point of the loss (e.g. a hinge margin); any
    parameter whose perturbed states come within *kink_guard* of one is
    skipped and counted rather than compared.

    Central differences carry round-off of order ``eps * |L| / h``, so the
    denominator floor is ``floor * max(1, |L|)``; it only matters where
    the true gradient is (near) zero, such as biases feeding instance norm.
    """
    net.zero_grad()
    base = objective(True)
    floor = floor * max(1.0, abs(base))
    triples = net.parameters()
    analytic = [g.copy() for _, _, g in triples]

    worst, worst_name = 0.0, ""
    checked = skipped = 0
    for (name, p, _), ga in zip(triples, analytic):
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + h
            f_plus = objective(False)
            near = kink is not None and kink() < kink_guard
            p[idx] = orig - h
            f_minus = objective(False)
            near = near or (kink is not None and kink() < kink_guard)
            p[idx] = orig
            if near:
                skipped += 1
                continue
            numeric = (f_plus - f_minus) / (2.0 * h)
            err = relative_error(float(ga[idx]), numeric, floor)
            checked += 1
            if err > worst:
                worst, worst_name = err, f"{name}{list(idx)}"
    return GradCheckReport(worst, checked, skipped, worst_name, tol)
