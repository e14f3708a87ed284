"""Discrepancies between two univariate empirical distributions.

All estimators expect equal sample sizes unless ``allow_unequal=True`` is
passed; the unequal-size forms are the natural two-sample generalisations
and are only used for pieces of composite distances whose sizes are random
(inclusion sizes, toad non-returns).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

KINDS = ("wasserstein1", "cvm", "energy", "mmd", "kl1nn", "l1")
TRANSFORMS = ("identity", "log")
MAD_SCALE = 1.4826
_BLOCK = 2048


class LengthMismatchError(ValueError):
    pass


class DegenerateSampleError(ValueError):
    pass


def _pair(y, z, allow_unequal: bool, min_n: int = 1):
    y = np.asarray(y, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if not allow_unequal and y.size != z.size:
        raise LengthMismatchError(f"sample sizes differ ({y.size} vs {z.size})")
    if y.size < min_n or z.size < min_n:
        raise DegenerateSampleError(f"need at least {min_n} observations per sample")
    return y, z


def wasserstein1(y, z, allow_unequal: bool = False) -> float:
    """Wasserstein-1 distance between empirical distributions.

    With equal sizes this is the mean absolute difference of order
    statistics. Unequal sizes fall back to the integral of |F_y - F_z|.
    """
    y, z = _pair(y, z, allow_unequal)
    if y.size == z.size:
        return float(np.mean(np.abs(np.sort(y) - np.sort(z))))
    h = np.sort(np.concatenate([y, z]))
    F = np.searchsorted(np.sort(y), h[:-1], side="right") / y.size
    G = np.searchsorted(np.sort(z), h[:-1], side="right") / z.size
    return float(np.sum(np.abs(F - G) * np.diff(h)))


def cvm_distance(y, z, allow_unequal: bool = False) -> float:
    """Two-sample Cramer-von Mises statistic.

    T = (n m / (n + m)^2) * sum over pooled points h of (F_y(h) - F_z(h))^2,
    the ECDF integral against the pooled empirical measure. Without ties it
    equals the rank form U / (n m (n + m)) - (4 n m - 1) / (6 (n + m)).
    Only the ordering of the pooled values enters, so any strictly
    increasing map applied to both samples leaves the value bit-for-bit
    unchanged. Tied values share one ECDF step, which keeps the statistic
    symmetric and zero for identical samples.
    """
    y, z = _pair(y, z, allow_unequal)
    n, m = y.size, z.size
    ys, zs = np.sort(y), np.sort(z)
    h = np.concatenate([ys, zs])
    # n m (F - G) as exact integers, evaluated at every pooled point
    diff = (m * np.searchsorted(ys, h, side="right")
            - n * np.searchsorted(zs, h, side="right")).astype(float)
    return float(diff @ diff) / (n * m * (n + m) ** 2)


def _pairwise_sum(a, b, fn) -> float:
    """sum_{i,j} fn(a_i - b_j), blocked to bound memory."""
    total = 0.0
    for start in range(0, a.size, _BLOCK):
        blk = a[start:start + _BLOCK, None] - b[None, :]
        total += float(np.sum(fn(blk)))
    return total


def energy_distance(y, z, p: int = 1, allow_unequal: bool = False) -> float:
    """Energy distance V-statistic.

    Observations are scalars, so the p-norm of a difference is its absolute
    value for every ``p``; ``p`` is validated and otherwise inert.
    """
    if p < 1:
        raise ValueError("energy order p must be >= 1")
    y, z = _pair(y, z, allow_unequal)
    n, m = y.size, z.size
    cross = _pairwise_sum(y, z, np.abs) / (n * m)
    yy = _pairwise_sum(y, y, np.abs) / (n * n)
    zz = _pairwise_sum(z, z, np.abs) / (m * m)
    return 2.0 * cross - yy - zz


def _kernel_fn(kernel: str, sigma: float):
    if not sigma > 0:
        raise ValueError("kernel bandwidth must be positive")
    if kernel == "gaussian":
        return lambda d: np.exp(-(d * d) / (2.0 * sigma))
    if kernel == "laplace":
        return lambda d: np.exp(-np.abs(d) / sigma)
    raise ValueError(f"unknown kernel {kernel!r}")


def mmd2(y, z, kernel: str = "gaussian", sigma: float = 1.0,
         drop_cross_diagonal: bool = False, allow_unequal: bool = False) -> float:
    """Squared MMD with U-statistic within-sample terms.

    Kernels: gaussian exp(-d^2 / (2 sigma)), laplace exp(-|d| / sigma).
    The cross term averages over all pairs; ``drop_cross_diagonal=True``
    instead drops the i == j pairs while keeping the 2/n^2 factor.
    The value can be negative.
    """
    y, z = _pair(y, z, allow_unequal, min_n=2)
    n, m = y.size, z.size
    k = _kernel_fn(kernel, sigma)
    kyy = _pairwise_sum(y, y, k) - n  # k(0) = 1 for both kernels
    kzz = _pairwise_sum(z, z, k) - m
    kyz = _pairwise_sum(y, z, k)
    if drop_cross_diagonal:
        if n != m:
            raise LengthMismatchError("a diagonal-free cross term needs equal sample sizes")
        kyz -= float(np.sum(k(y - z)))
    return kyy / (n * (n - 1)) + kzz / (m * (m - 1)) - 2.0 * kyz / (n * m)


def median_pairwise_distance(y) -> float:
    y = np.sort(np.asarray(y, dtype=float).ravel())
    if y.size < 2:
        raise DegenerateSampleError("need two observations for a pairwise distance")
    iu = np.triu_indices(min(y.size, 2000), k=1)
    sub = y if y.size <= 2000 else y[np.linspace(0, y.size - 1, 2000).astype(int)]
    d = np.abs(sub[iu[0]] - sub[iu[1]])
    med = float(np.median(d))
    if med <= 0:
        raise DegenerateSampleError("median pairwise distance is zero")
    return med


def _nn_other(sorted_ref, x):
    """Distance from each x to its nearest neighbour in sorted_ref."""
    idx = np.searchsorted(sorted_ref, x)
    left = sorted_ref[np.clip(idx - 1, 0, sorted_ref.size - 1)]
    right = sorted_ref[np.clip(idx, 0, sorted_ref.size - 1)]
    return np.minimum(np.abs(x - left), np.abs(x - right))


def _nn_self(x):
    """Distance from each x_i to its nearest other x_j."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    gaps = np.diff(xs)
    nn = np.empty_like(xs)
    nn[0] = gaps[0]
    nn[-1] = gaps[-1]
    nn[1:-1] = np.minimum(gaps[:-1], gaps[1:])
    out = np.empty_like(nn)
    out[order] = nn
    return out


def kl_1nn(y, z, allow_unequal: bool = False) -> float:
    """1-nearest-neighbour KL divergence estimate.

    (1/n) sum_i ln( min_j |z_i - y_j| / min_{j != i} |z_i - z_j| ) + ln(m / (n - 1))
    with n = len(z), m = len(y) (m = n for equal sizes).
    """
    y, z = _pair(y, z, allow_unequal, min_n=2)
    num = _nn_other(np.sort(y), z)
    den = _nn_self(z)
    if np.any(num == 0) or np.any(den == 0):
        raise DegenerateSampleError("zero nearest-neighbour distance (tied values)")
    return float(np.mean(np.log(num) - np.log(den)) + np.log(y.size / (z.size - 1)))


@dataclass(frozen=True)
class DistanceSpec:
    """Which discrepancy to use and how to pre-transform the data.

    ``bandwidth=None`` for MMD means "fill in from the observed sample" via
    :meth:`bind`: the median pairwise distance for the Laplace kernel and its
    square for the Gaussian kernel (whose exponent divides by 2*sigma).
    """

    kind: str
    transform: str = "identity"
    p: int = 1
    kernel: str = "gaussian"
    bandwidth: float | None = None
    drop_cross_diagonal: bool = False
    allow_unequal: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distance kind {self.kind!r}")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"unknown transform {self.transform!r}")
        if self.kind == "energy" and self.p < 1:
            raise ValueError("energy order p must be >= 1")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("mmd bandwidth must be positive")

    def apply_transform(self, x):
        x = np.asarray(x, dtype=float)
        if self.transform == "log":
            if np.any(x <= 0):
                raise ValueError("log transform needs strictly positive data")
            return np.log(x)
        return x

    def bind(self, y) -> "DistanceSpec":
        if self.kind != "mmd" or self.bandwidth is not None:
            return self
        med = median_pairwise_distance(self.apply_transform(y))
        bw = med * med if self.kernel == "gaussian" else med
        return replace(self, bandwidth=bw)

    def __call__(self, y, z) -> float:
        if self.kind == "l1":
            return float(np.sum(np.abs(np.asarray(y, float) - np.asarray(z, float))))
        ty, tz = self.apply_transform(y), self.apply_transform(z)
        if self.allow_unequal and (np.size(ty) == 0 or np.size(tz) == 0):
            return 0.0 if np.size(ty) == np.size(tz) else np.inf
        if self.kind == "wasserstein1":
            return wasserstein1(ty, tz, self.allow_unequal)
        if self.kind == "cvm":
            return cvm_distance(ty, tz, self.allow_unequal)
        if self.kind == "energy":
            return energy_distance(ty, tz, self.p, self.allow_unequal)
        if self.kind == "kl1nn":
            return kl_1nn(ty, tz, self.allow_unequal)
        if self.bandwidth is None:
            raise ValueError("mmd bandwidth unset; call bind(observed) first")
        return mmd2(ty, tz, self.kernel, self.bandwidth, self.drop_cross_diagonal,
                    self.allow_unequal)


@dataclass(frozen=True)
class CompositeDistance:
    """Weighted sum of per-piece discrepancies."""

    parts: tuple
    weights: tuple = field(default=None)

    def __post_init__(self):
        parts = tuple(self.parts)
        w = (1.0,) * len(parts) if self.weights is None else tuple(float(v) for v in self.weights)
        if len(parts) == 0 or len(w) != len(parts):
            raise ValueError("parts and weights must align and be non-empty")
        if any(v < 0 for v in w) or not any(v > 0 for v in w):
            raise ValueError("weights must be >= 0 with at least one positive")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "weights", w)

    def with_weights(self, weights) -> "CompositeDistance":
        return CompositeDistance(self.parts, tuple(weights))

    def bind(self, y_pieces) -> "CompositeDistance":
        return CompositeDistance(tuple(p.bind(y) for p, y in zip(self.parts, y_pieces)), self.weights)

    def individual(self, y_pieces, z_pieces) -> np.ndarray:
        if len(y_pieces) != len(self.parts) or len(z_pieces) != len(self.parts):
            raise ValueError("piece lists do not align with the composite's parts")
        return np.array([p(a, b) for p, a, b in zip(self.parts, y_pieces, z_pieces)])

    def __call__(self, y_pieces, z_pieces) -> float:
        return composite_eval(self, y_pieces, z_pieces)


def composite_eval(parts: CompositeDistance, y_pieces: Sequence, z_pieces: Sequence) -> float:
    vals = parts.individual(y_pieces, z_pieces)
    w = np.asarray(parts.weights)
    # zero-weight parts never contribute, even if infinite
    return float(np.sum(w[w > 0] * vals[w > 0]))


def calibrate_weights(pools, robust: bool = False) -> np.ndarray:
    """Inverse-scale weights from pilot discrepancy pools.

    Scale is the sample standard deviation, or 1.4826 * MAD when ``robust``.
    """
    weights = []
    for k, pool in enumerate(pools):
        x = np.asarray(pool, dtype=float).ravel()
        x = x[np.isfinite(x)]
        if np.unique(x).size < 2:
            raise DegenerateSampleError(f"pool {k} has fewer than two distinct values")
        if robust:
            scale = MAD_SCALE * float(np.median(np.abs(x - np.median(x))))
        else:
            scale = float(np.std(x, ddof=1))
        if not scale > 0:
            raise DegenerateSampleError(f"pool {k} has zero spread")
        weights.append(1.0 / scale)
    return np.array(weights)
