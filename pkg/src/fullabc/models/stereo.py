"""Stereological extremes: Poisson number of inclusions, each with a
generalised-Pareto exceedance size above a fixed threshold."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

THRESHOLD = 5.0  # microns


@dataclass(frozen=True)
class StereoParams:
    lam: float
    sigma: float
    xi: float

    def __post_init__(self):
        if not (self.lam > 0 and self.sigma > 0):
            raise ValueError("rate and scale must be positive")

    @classmethod
    def from_vector(cls, theta) -> "StereoParams":
        return cls(*(float(v) for v in np.asarray(getattr(theta, "values", theta))))


@dataclass(frozen=True)
class StereoData:
    sizes: np.ndarray
    threshold: float = THRESHOLD

    def __post_init__(self):
        s = np.asarray(self.sizes, dtype=float).ravel()
        if np.any(s <= self.threshold):
            raise ValueError("inclusion sizes must exceed the threshold")
        s.setflags(write=False)
        object.__setattr__(self, "sizes", s)

    @property
    def count(self) -> int:
        return int(self.sizes.size)

    def pieces(self):
        """(count, sizes) for composite distances."""
        return (np.array([self.count], dtype=float), self.sizes)


def gpd_inverse(u, sigma: float, xi: float):
    u = np.asarray(u, dtype=float)
    if xi == 0.0:
        return -sigma * np.log(u)
    return sigma * np.expm1(-xi * np.log(u)) / xi


def stereo_simulate(theta, rng: np.random.Generator, threshold: float = THRESHOLD,
                    count: int | None = None) -> StereoData:
    """Draw one dataset. ``count`` forces the number of inclusions (testing aid)."""
    if not isinstance(theta, StereoParams):
        theta = StereoParams.from_vector(theta)
    n = rng.poisson(theta.lam) if count is None else int(count)
    u = 1.0 - rng.random(n)  # (0, 1]
    exceed = gpd_inverse(u, theta.sigma, theta.xi)
    # u == 1 gives a zero exceedance; nudge to keep sizes strictly above v0
    exceed = np.maximum(exceed, np.finfo(float).tiny)
    sizes = threshold + exceed
    sizes = np.where(sizes > threshold, sizes, np.nextafter(threshold, np.inf))
    return StereoData(sizes, threshold)


def stereo_simple_summaries(data: StereoData) -> np.ndarray:
    """Count plus log of min, mean and max inclusion size."""
    s = data.sizes
    if s.size == 0:
        return np.array([0.0, np.nan, np.nan, np.nan])
    return np.array([float(s.size), np.log(s.min()), np.log(s.mean()), np.log(s.max())])
