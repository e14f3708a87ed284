"""Tolerance and synthetic-likelihood sample-size calibration."""

from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np

from ..core import SeedSpec

log = logging.getLogger(__name__)

BSL_SD_BAND = (1.0, 2.0)
BSL_SD_TARGET = 1.5


def discrepancy_pool(simulate: Callable, discrepancy: Callable, n_pool: int,
                     seed: SeedSpec) -> np.ndarray:
    """Discrepancies between the observed data and ``n_pool`` datasets
    simulated at a fixed parameter, drawn from one seeded stream."""
    rng = seed.rng()
    pool = np.empty(n_pool)
    for i in range(n_pool):
        pool[i] = discrepancy(simulate(rng))
    return pool


def epsilon_from_pool(pool, q: float) -> float:
    """Linear-interpolation q-quantile of the finite pool values."""
    if not (0 < q <= 1):
        raise ValueError("quantile level must lie in (0, 1]")
    pool = np.asarray(pool, float)
    pool = pool[np.isfinite(pool)]
    if pool.size == 0:
        raise ValueError("discrepancy pool has no finite values")
    return float(np.quantile(pool, q))


def calibrate_epsilon(simulate: Callable, discrepancy: Callable, q: float, n_pool: int,
                      seed: SeedSpec) -> float:
    """ABC tolerance as the q-quantile of simulated discrepancies.

    ``simulate(rng)`` draws one dataset at the central parameter value and
    ``discrepancy(z)`` measures it against the observed data.
    """
    return epsilon_from_pool(discrepancy_pool(simulate, discrepancy, n_pool, seed), q)


def select_m(grid: Sequence[int], sds: Sequence[float], band=BSL_SD_BAND,
             target: float = BSL_SD_TARGET) -> int:
    """Smallest m whose log-likelihood sd lies in ``band``; otherwise the m
    whose sd is closest to ``target``."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty m grid")
    sds = np.asarray(sds, float)
    order = np.argsort(grid, kind="stable")
    for i in order:
        if band[0] <= sds[i] <= band[1]:
            return int(grid[i])
    finite = np.where(np.isfinite(sds))[0]
    if finite.size == 0:
        raise RuntimeError("BSL tuning failed: no m gave a finite log-likelihood spread")
    best = finite[np.argmin(np.abs(sds[finite] - target))]
    return int(grid[best])


def loglik_sd(make_backend: Callable, theta, m: int, seed: SeedSpec, repeats: int = 50,
              max_fail_fraction: float = 0.5) -> float:
    """Standard deviation of repeated synthetic log-likelihood estimates."""
    backend = make_backend(m)
    vals = []
    fails = 0
    for r in range(repeats):
        try:
            vals.append(backend(theta, seed.with_(proposal=r).rng()).loglik)
        except (np.linalg.LinAlgError, ValueError) as exc:
            fails += 1
            log.debug("BSL tuning evaluation failed at m=%d: %s", m, exc)
    if fails > max_fail_fraction * repeats or len(vals) < 2:
        return np.nan
    return float(np.std(vals, ddof=1))


def tune_bsl_m(make_backend: Callable, theta, grid: Sequence[int], seed: SeedSpec,
               repeats: int = 50):
    """Pick m from ``grid`` by the log-likelihood-sd rule. Returns (m, sds)."""
    # one stream per grid point so the sds are independent
    sds = [loglik_sd(make_backend, theta, m, seed.with_(chain=seed.chain + 1000 * (i + 1)), repeats)
           for i, m in enumerate(grid)]
    return select_m(grid, sds), sds
