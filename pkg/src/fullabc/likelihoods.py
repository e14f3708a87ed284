"""Likelihood estimators used inside Metropolis-Hastings.

Each estimator is a callable ``backend(theta, rng) -> LikelihoodEstimate``
built from a simulator ``simulate(theta, rng)`` and the observed data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp

LOG_2PI = np.log(2.0 * np.pi)


class SingularCovarianceError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class LikelihoodEstimate:
    """A (possibly noisy) log-likelihood value plus bookkeeping."""

    loglik: float
    n_sims: int
    distance: float = np.nan
    meta: dict = field(default_factory=dict, compare=False)


# ---------------------------------------------------------------- ABC

@dataclass
class AbcLikelihood:
    """Indicator-kernel ABC with one simulated dataset per call.

    ``discrepancy(z)`` measures the distance from the observed data to a
    simulated dataset; the estimate is 1 when it is <= epsilon, else 0.
    Set ``signed=True`` for discrepancies that can be negative (the
    unbiased MMD), which lets epsilon be any finite number.
    """

    simulate: Callable
    discrepancy: Callable
    epsilon: float
    signed: bool = False

    def __post_init__(self):
        if np.isnan(self.epsilon) or (not self.signed and not self.epsilon > 0):
            raise ValueError("tolerance must be positive")

    def __call__(self, theta, rng) -> LikelihoodEstimate:
        z = self.simulate(theta, rng)
        rho = float(self.discrepancy(z))
        weight = 1.0 if rho <= self.epsilon else 0.0
        return LikelihoodEstimate(0.0 if weight else -np.inf, 1, rho, {"weight": weight})


def abc_loglik_estimate(theta, y, discrepancy, epsilon, simulate, rng) -> LikelihoodEstimate:
    """One-shot form of :class:`AbcLikelihood` with an explicit observed dataset;
    ``discrepancy(y, z)`` takes both datasets."""
    return AbcLikelihood(simulate, lambda z: discrepancy(y, z), epsilon)(theta, rng)


# ---------------------------------------------------------------- BSL

def gaussian_loglik(x, mean, cov) -> float:
    """log N(x; mean, cov) via Cholesky; raises SingularCovarianceError."""
    x = np.atleast_1d(np.asarray(x, float))
    cov = np.atleast_2d(np.asarray(cov, float))
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError("synthetic covariance is not positive definite") from exc
    diag = np.diag(L)
    if np.any(diag <= 1e-12 * max(1.0, float(np.max(diag)))):
        raise SingularCovarianceError("synthetic covariance is numerically singular")
    u = np.linalg.solve(L, x - mean)
    return float(-0.5 * (x.size * LOG_2PI + u @ u) - np.sum(np.log(diag)))


def bsl_from_stats(obs_stat, sim_stats) -> float:
    """Plug-in Gaussian synthetic log-likelihood with 1/m covariance."""
    S = np.asarray(sim_stats, float)
    if S.ndim == 1:
        S = S[:, None]
    if not np.all(np.isfinite(S)):
        raise SingularCovarianceError("non-finite simulated summary statistic")
    mu = S.mean(axis=0)
    dev = S - mu
    cov = dev.T @ dev / S.shape[0]
    return gaussian_loglik(obs_stat, mu, cov)


@dataclass
class BslLikelihood:
    """Standard BSL. ``simulate_stats(theta, rng, m)`` returns an (m, d) array
    of summary statistics for m independent simulated datasets."""

    simulate_stats: Callable
    obs_stat: np.ndarray
    m: int

    def __post_init__(self):
        d = np.atleast_1d(self.obs_stat).size
        if self.m < d + 2:
            raise ValueError(f"m={self.m} too small for {d} summary statistics")

    def __call__(self, theta, rng) -> LikelihoodEstimate:
        S = self.simulate_stats(theta, rng, self.m)
        return LikelihoodEstimate(bsl_from_stats(self.obs_stat, S), self.m)


def bsl_loglik(theta, obs_stat, simulate_stats, m, rng) -> float:
    return BslLikelihood(simulate_stats, np.asarray(obs_stat), m)(theta, rng).loglik


# ---------------------------------------------------------------- KDE

def silverman_bandwidth(x) -> float:
    x = np.asarray(x, float).ravel()
    sd = np.std(x, ddof=1) if x.size > 1 else 0.0
    q75, q25 = np.percentile(x, [75, 25]) if x.size > 1 else (0.0, 0.0)
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    if not spread > 0:
        return np.nan
    return 0.9 * spread * x.size ** (-0.2)


def kde_logpdf(points, data, bandwidth: float) -> np.ndarray:
    """Gaussian-kernel log density of ``data`` evaluated at ``points``."""
    pts = np.atleast_1d(np.asarray(points, float))
    data = np.asarray(data, float).ravel()
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    out = np.empty(pts.size)
    chunk = max(1, 2_000_000 // max(1, data.size))
    log_norm = np.log(data.size * bandwidth) + 0.5 * LOG_2PI
    for s in range(0, pts.size, chunk):
        # in-place log-sum-exp; this is the hot loop of every KDE estimate
        u = np.subtract.outer(pts[s:s + chunk], data)
        u /= bandwidth
        u *= u
        u *= -0.5
        mx = u.max(axis=1)
        u -= mx[:, None]
        np.exp(u, out=u)
        out[s:s + chunk] = mx + np.log(u.sum(axis=1)) - log_norm
    return out


def kde_pooled_loglik(y, sims, bandwidth: float | None = None, recycle: bool = True) -> float:
    """Sum over observations of the log KDE likelihood.

    ``sims`` is an (m, n_sim) array of simulated datasets. With ``recycle``
    one KDE is built over all m * n_sim points; otherwise the m per-dataset
    KDEs (each with its own Silverman bandwidth unless ``bandwidth`` is
    fixed) are averaged. Both agree exactly when m = 1.
    """
    y = np.asarray(y, float).ravel()
    sims = np.atleast_2d(np.asarray(sims, float))
    if recycle:
        pool = sims.ravel()
        h = silverman_bandwidth(pool) if bandwidth is None else bandwidth
        if not h > 0:
            return -np.inf
        return float(np.sum(kde_logpdf(y, pool, h)))
    per = []
    for row in sims:
        h = silverman_bandwidth(row) if bandwidth is None else bandwidth
        if not h > 0:
            return -np.inf
        per.append(kde_logpdf(y, row, h))
    per = np.array(per)
    return float(np.sum(logsumexp(per, axis=0) - np.log(sims.shape[0])))


def discrete_kde_logpmf(k: int, counts, bandwidth: float | None = None) -> float:
    """Log pmf at integer ``k`` from integer-kernel smoothing of simulated counts.

    Each simulated count spreads its mass over the integers with weights
    proportional to exp(-d^2 / (2 h^2)), normalised over all integers.
    """
    counts = np.asarray(counts, float).ravel()
    if bandwidth is None:
        h = silverman_bandwidth(counts)
        h = max(h if np.isfinite(h) else 0.0, 0.5)
    else:
        h = bandwidth
    span = int(np.ceil(12 * h)) + 1
    offs = np.arange(-span, span + 1)
    log_norm = logsumexp(-0.5 * (offs / h) ** 2)
    d = k - counts
    return float(logsumexp(-0.5 * (d / h) ** 2) - log_norm - np.log(counts.size))


@dataclass
class KdeLikelihood:
    """Kernel density likelihood for independent observations.

    ``simulate_many(theta, rng, m)`` returns m simulated datasets as an
    (m, n_sim) array. ``transform`` is applied to observed and simulated
    values before density estimation.
    """

    simulate_many: Callable
    y: np.ndarray
    m: int
    bandwidth: float | None = None
    recycle: bool = True
    transform: Callable | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("fixed bandwidth must be positive")
        self._ty = self.y if self.transform is None else self.transform(self.y)

    def __call__(self, theta, rng) -> LikelihoodEstimate:
        sims = self.simulate_many(theta, rng, self.m)
        if self.transform is not None:
            sims = self.transform(sims)
        ll = kde_pooled_loglik(self._ty, sims, self.bandwidth, self.recycle)
        return LikelihoodEstimate(ll, self.m)


def kde_loglik(theta, y, simulate_many, m, rng, bandwidth=None, recycle=True) -> float:
    return KdeLikelihood(simulate_many, np.asarray(y, float), m, bandwidth, recycle)(theta, rng).loglik


@dataclass
class StereoKdeLikelihood:
    """Count density times size density, treated as independent.

    ``simulate(theta, rng)`` returns one StereoData; sizes from the m
    simulations are concatenated into a single KDE. ``transform`` applies
    to sizes only.
    """

    simulate: Callable
    obs_count: int
    obs_sizes: np.ndarray
    m: int
    bandwidth: float | None = None
    transform: Callable | None = None

    def __post_init__(self):
        sizes = np.asarray(self.obs_sizes, float)
        self._ty = sizes if self.transform is None else self.transform(sizes)

    def __call__(self, theta, rng) -> LikelihoodEstimate:
        sims = [self.simulate(theta, rng) for _ in range(self.m)]
        counts = np.array([s.count for s in sims])
        pool = np.concatenate([s.sizes for s in sims]) if counts.sum() else np.empty(0)
        if self.transform is not None:
            pool = self.transform(pool)
        ll = discrete_kde_logpmf(self.obs_count, counts)
        if self._ty.size:
            if pool.size < 2:
                return LikelihoodEstimate(-np.inf, self.m)
            h = silverman_bandwidth(pool) if self.bandwidth is None else self.bandwidth
            if not h > 0:
                return LikelihoodEstimate(-np.inf, self.m)
            ll += float(np.sum(kde_logpdf(self._ty, pool, h)))
        return LikelihoodEstimate(ll, self.m)
