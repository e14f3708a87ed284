"""Conjugate toy models with closed-form posteriors, used as oracles."""

from __future__ import annotations

import numpy as np
from scipy import stats


def gaussian_mean_simulate(theta, rng, n: int, sd: float = 1.0, size=None):
    mu = float(np.asarray(getattr(theta, "values", theta)).ravel()[0])
    shape = n if size is None else (size, n)
    return mu + sd * rng.standard_normal(shape)


def gaussian_mean_posterior(y, lower: float, upper: float, sd: float = 1.0):
    """Mean and sd of N(mean(y), sd^2/n) truncated to (lower, upper): the
    posterior under a uniform prior."""
    y = np.asarray(y, float)
    loc, scale = y.mean(), sd / np.sqrt(y.size)
    a, b = (lower - loc) / scale, (upper - loc) / scale
    dist = stats.truncnorm(a, b, loc=loc, scale=scale)
    return float(dist.mean()), float(dist.std())


def exponential_simulate(theta, rng, n: int, size=None):
    rate = float(np.asarray(getattr(theta, "values", theta)).ravel()[0])
    shape = n if size is None else (size, n)
    return rng.exponential(1.0 / rate, size=shape)


def exponential_posterior(y, lower: float, upper: float):
    """Posterior of the rate under U(lower, upper): Gamma(n + 1, sum y)
    truncated to the box. Returns (mean, sd)."""
    y = np.asarray(y, float)
    shape, rate = y.size + 1, float(y.sum())
    g = stats.gamma(shape, scale=1.0 / rate)
    g1 = stats.gamma(shape + 1, scale=1.0 / rate)
    g2 = stats.gamma(shape + 2, scale=1.0 / rate)
    mass = g.cdf(upper) - g.cdf(lower)
    m1 = shape / rate * (g1.cdf(upper) - g1.cdf(lower)) / mass
    m2 = shape * (shape + 1) / rate ** 2 * (g2.cdf(upper) - g2.cdf(lower)) / mass
    return float(m1), float(np.sqrt(m2 - m1 * m1))
