"""Seeded synthetic stripe/gradient images for toy-scale training."""

from __future__ import annotations

import numpy as np


def synthetic_stripes(n: int, width: int = 64, height: int = 32, seed: int = 0) -> list[np.ndarray]:
    """Return *n* RGB images of horizontal colour bands over a soft gradient.

    Each image has 2-4 bands with random boundaries and colours, and a
    smooth left-to-right brightness ramp.  Band boundaries give long
    horizontal Canny edges that continue across any centred column mask.
    """
    rng = np.random.default_rng(seed)
    images = []
    cols = np.linspace(0.0, 1.0, width)
    for _ in range(n):
        n_bands = int(rng.integers(2, 5))
        cuts = np.sort(rng.choice(np.arange(4, height - 3), size=n_bands - 1, replace=False))
        bounds = np.concatenate([[0], cuts, [height]])
        img = np.empty((height, width, 3))
        for b in range(n_bands):
            colour = rng.uniform(0.1, 0.9, size=3)
            img[bounds[b]:bounds[b + 1]] = colour
        ramp = rng.uniform(-0.1, 0.1) * (cols - 0.5)
        img += ramp[None, :, None]
        images.append(np.clip(img, 0.0, 1.0))
    return images
