"""Fowler's toads random-return movement model and its lag summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stable import stable_sample

N_TOADS = 66
N_DAYS = 63
LAGS = (1, 2, 4, 8)
RETURN_THRESHOLD = 10.0  # metres
N_QUANTILES = 11


class SummaryError(ValueError):
    pass


@dataclass(frozen=True)
class ToadParams:
    alpha: float
    scale: float
    p0: float

    def __post_init__(self):
        if not (0 < self.alpha <= 2):
            raise ValueError("alpha must lie in (0, 2]")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if not (0 <= self.p0 <= 1):
            raise ValueError("p0 must lie in [0, 1]")

    @classmethod
    def from_vector(cls, theta) -> "ToadParams":
        return cls(*(float(v) for v in np.asarray(getattr(theta, "values", theta))))


@dataclass(frozen=True)
class ToadSummary:
    returns: tuple      # count per lag
    non_returns: tuple  # displacement vectors per lag
    lags: tuple = LAGS

    def pieces(self):
        out = []
        for c, v in zip(self.returns, self.non_returns):
            out.append(np.array([float(c)]))
            out.append(v)
        return out


def toad_simulate(theta, rng: np.random.Generator, n_toads: int = N_TOADS,
                  n_days: int = N_DAYS) -> np.ndarray:
    """Matrix (n_days x n_toads) of end-of-day refuge locations.

    Every toad starts at a refuge at 0. Each night it moves a symmetric
    stable step from its current refuge; with probability p0 it then goes
    back to one of its refuges, chosen proportional to visit counts,
    otherwise its new position becomes a refuge.
    """
    if not isinstance(theta, ToadParams):
        theta = ToadParams.from_vector(theta)
    Y = np.zeros((n_days, n_toads))
    refuges = np.zeros((n_toads, n_days))
    visits = np.zeros((n_toads, n_days))
    visits[:, 0] = 1.0
    n_ref = np.ones(n_toads, dtype=int)
    rows = np.arange(n_toads)
    for day in range(1, n_days):
        step = stable_sample(theta.alpha, theta.scale, rng, size=n_toads)
        new_pos = Y[day - 1] + step
        ret = rng.random(n_toads) < theta.p0
        u = rng.random(n_toads)
        cum = np.cumsum(visits, axis=1)
        pick = np.argmax(cum > (u * cum[:, -1])[:, None], axis=1)
        back = refuges[rows, pick]
        Y[day] = np.where(ret, back, new_pos)
        visits[rows[ret], pick[ret]] += 1.0
        fresh = rows[~ret]
        refuges[fresh, n_ref[fresh]] = new_pos[fresh]
        visits[fresh, n_ref[fresh]] = 1.0
        n_ref[fresh] += 1
    return Y


def toad_summarize(Y, lags=LAGS, threshold: float = RETURN_THRESHOLD) -> ToadSummary:
    """Split lagged absolute displacements into return counts and non-returns.

    |dy| < threshold counts as a return; pairs with a missing (NaN) end are
    skipped.
    """
    Y = np.asarray(Y, dtype=float)
    counts, moves = [], []
    for lag in lags:
        if lag >= Y.shape[0]:
            counts.append(0)
            moves.append(np.empty(0))
            continue
        d = np.abs(Y[lag:] - Y[:-lag])
        # column-major order: toad by toad
        d = d.T.ravel()
        d = d[np.isfinite(d)]
        counts.append(int(np.sum(d < threshold)))
        moves.append(d[d >= threshold])
    return ToadSummary(tuple(counts), tuple(moves), tuple(lags))


def toad_quantile_summaries(s: ToadSummary) -> np.ndarray:
    """Per lag: log differences of the 0, 0.1, ..., 1 quantiles of the
    non-returns, their median, and the return count (12 per lag)."""
    probs = np.linspace(0.0, 1.0, N_QUANTILES)
    out = []
    for c, v in zip(s.returns, s.non_returns):
        if v.size < N_QUANTILES:
            raise SummaryError(f"only {v.size} non-returns; need {N_QUANTILES}")
        q = np.quantile(v, probs)
        dq = np.diff(q)
        if np.any(dq <= 0):
            raise SummaryError("tied quantiles give an undefined log difference")
        out.extend(np.log(dq))
        out.append(np.median(v))
        out.append(float(c))
    return np.array(out)
