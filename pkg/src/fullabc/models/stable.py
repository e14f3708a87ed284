"""Symmetric alpha-stable variates via Chambers-Mallows-Stuck."""

from __future__ import annotations

import numpy as np


def stable_sample(alpha: float, scale: float, rng: np.random.Generator, size=None):
    """Draw from S(alpha, scale) with beta = 0, characteristic function
    exp(-|scale * t|^alpha). alpha = 2 gives N(0, 2 scale^2); alpha = 1 Cauchy."""
    if not (0 < alpha <= 2):
        raise ValueError("alpha must lie in (0, 2]")
    if not scale > 0:
        raise ValueError("scale must be positive")
    v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size=size)
    w = rng.exponential(1.0, size=size)
    if alpha == 1.0:
        x = np.tan(v)
    else:
        x = (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
             * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))
    return scale * x
