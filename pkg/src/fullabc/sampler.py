"""Random-walk Metropolis-Hastings on the logit-transformed prior box.

The likelihood backend is any callable ``backend(theta_vector, rng)``
returning a :class:`~fullabc.likelihoods.LikelihoodEstimate`. The estimate
at the current state is carried forward and never refreshed, so with an
unbiased non-negative estimator (ABC) the chain is pseudo-marginal, and
with a plug-in estimator (BSL, KDE) it follows the usual practice.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (MAIN_STREAM, PILOT2_STREAM, PILOT_STREAM, BoxPrior, SeedSpec,
                   from_unbounded, log_jacobian, to_unbounded)
from .likelihoods import LikelihoodEstimate

log = logging.getLogger(__name__)

OPTIMAL_SCALE = 2.38
BURN_IN_FRACTION = 0.2
PILOT_FRACTION = 0.1

# Raised inside a backend to signal "this proposal has no usable estimate".
RECOVERABLE_ERRORS = (np.linalg.LinAlgError, ArithmeticError, ValueError, RuntimeError)


@dataclass
class MhConfig:
    iterations: int
    proposal_cov: np.ndarray
    seed: SeedSpec
    early_reject: bool = False  # skip simulation when the prior/Jacobian ratio alone rejects

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        cov = np.atleast_2d(np.asarray(self.proposal_cov, float))
        if not np.allclose(cov, cov.T):
            raise ValueError("proposal covariance must be symmetric")
        np.linalg.cholesky(cov)  # raises if not positive definite
        self.proposal_cov = cov


@dataclass
class Chain:
    names: tuple
    theta: np.ndarray         # (iterations, d) in the original space
    loglik: np.ndarray        # current-state estimate at each iteration
    accepted: np.ndarray      # bool, whether the move at this iteration was accepted
    distance: np.ndarray      # realised ABC discrepancy of the current state (nan otherwise)
    n_sims: int = 0
    failures: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted))

    def post_burn_in(self, fraction: float = BURN_IN_FRACTION) -> np.ndarray:
        return self.theta[int(fraction * len(self.theta)):]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(self.names) + ["loglik", "accepted", "distance"])
            for t, ll, a, d in zip(self.theta, self.loglik, self.accepted, self.distance):
                w.writerow([repr(float(v)) for v in t] + [repr(float(ll)), int(a), repr(float(d))])

    @classmethod
    def from_csv(cls, path) -> "Chain":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        d = len(header) - 3
        arr = np.array([[float(x) for x in r] for r in body]) if body else np.empty((0, d + 3))
        return cls(tuple(header[:d]), arr[:, :d], arr[:, d], arr[:, d + 1].astype(bool), arr[:, d + 2])


def _estimate(backend, theta, rng, in_support):
    if in_support is not None and not in_support(theta):
        return LikelihoodEstimate(-np.inf, 0), False
    try:
        return backend(theta, rng), False
    except RECOVERABLE_ERRORS as exc:
        log.debug("backend failed at %s: %s", theta, exc)
        return LikelihoodEstimate(-np.inf, 0), True


def run_mh(cfg: MhConfig, prior: BoxPrior, backend: Callable, theta0,
           init_estimate: LikelihoodEstimate | None = None,
           in_support: Callable | None = None, init_attempts: int = 100) -> Chain:
    """Run one chain.

    ``theta0`` must be strictly inside the prior box. The chain may start
    at a state with a -inf estimate (e.g. an ABC weight of zero); the first
    proposal with a finite estimate is then accepted. Up to
    ``init_attempts`` fresh estimates are tried at ``theta0`` before the
    first iteration.
    """
    names = prior.names
    d = prior.dim
    x, _ = to_unbounded(np.asarray(getattr(theta0, "values", theta0), float), prior)
    lj = log_jacobian(x, prior)
    L = np.linalg.cholesky(cfg.proposal_cov)
    n_sims = 0
    failures = 0
    cur_theta = from_unbounded(x, prior).values
    if init_estimate is not None:
        cur = init_estimate
    else:
        cur = LikelihoodEstimate(-np.inf, 0)
        init_seed = cfg.seed.with_(proposal=cfg.iterations)
        rng0 = init_seed.rng()
        for _ in range(init_attempts):
            cur, failed = _estimate(backend, cur_theta, rng0, in_support)
            n_sims += cur.n_sims
            failures += failed
            if np.isfinite(cur.loglik):
                break

    thetas = np.empty((cfg.iterations, d))
    logliks = np.empty(cfg.iterations)
    accepted = np.zeros(cfg.iterations, dtype=bool)
    dists = np.empty(cfg.iterations)
    for t in range(cfg.iterations):
        rng = cfg.seed.with_(proposal=t).rng()
        x_new = x + L @ rng.standard_normal(d)
        log_u = np.log(rng.random())
        lj_new = log_jacobian(x_new, prior)
        theta_new = from_unbounded(x_new, prior).values
        # uniform prior: density ratio is 1 inside the box, and the logit map
        # keeps proposals inside except where float rounding saturates
        if not prior.contains(theta_new):
            prior_ratio = -np.inf
        else:
            prior_ratio = lj_new - lj
        if cfg.early_reject and np.isfinite(cur.loglik) and log_u >= prior_ratio:
            # the estimate can never exceed 0 for indicator ABC, so this is final
            move = False
        elif prior_ratio == -np.inf:
            move = False
        else:
            est, failed = _estimate(backend, theta_new, rng, in_support)
            n_sims += est.n_sims
            failures += failed
            if not np.isfinite(est.loglik):
                move = False
            elif not np.isfinite(cur.loglik):
                move = True
            else:
                move = log_u < prior_ratio + est.loglik - cur.loglik
            if move:
                cur = est
        if move:
            x, lj, cur_theta = x_new, lj_new, theta_new
        thetas[t] = cur_theta
        logliks[t] = cur.loglik
        accepted[t] = move
        dists[t] = cur.distance
    if failures:
        log.info("%d proposals rejected after backend failures", failures)
    return Chain(names, thetas, logliks, accepted, dists, n_sims, failures,
                 {"final_estimate": cur})


def ess(x) -> float:
    """Effective sample size with Geyer's initial positive sequence.

    Autocorrelations are summed in adjacent pairs until the first pair with
    a negative sum.
    """
    x = np.asarray(x, float).ravel()
    n = x.size
    if n < 100:
        raise ValueError("need at least 100 draws")
    xc = x - x.mean()
    var = float(xc @ xc) / n
    if var <= 0 or not np.isfinite(var):
        return 1.0
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n] / n
    rho = acov / acov[0]
    tau = -1.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair < 0:
            break
        tau += 2.0 * pair
    return float(n / max(tau, 1e-12))


def _scaled_cov(samples, fallback):
    d = samples.shape[1]
    if len(np.unique(samples, axis=0)) < max(3, d + 1):
        return fallback
    cov = np.atleast_2d(np.cov(samples, rowvar=False))
    cov = 0.5 * (cov + cov.T) + 1e-10 * np.eye(d)
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return fallback
    return OPTIMAL_SCALE ** 2 / d * cov


def pilot_proposal(prior: BoxPrior, backend, theta0, iterations: int, seed: SeedSpec,
                   in_support=None, init_scale: float = 0.1, early_reject: bool = False):
    """Two-stage pilot: half the budget with a scaled identity, half with the
    covariance learned from the first half. Returns the proposal covariance
    2.38^2/d * pilot covariance (unbounded space) and the final pilot chain.
    """
    d = prior.dim
    first = max(1, iterations // 2)
    eye = init_scale ** 2 * np.eye(d)
    c1 = run_mh(MhConfig(first, eye, seed.with_(chain=PILOT_STREAM, proposal=0), early_reject),
                prior, backend, theta0, in_support=in_support)
    x1 = np.array([to_unbounded(t, prior)[0] for t in c1.theta])
    cov1 = _scaled_cov(x1, eye)
    c2 = run_mh(MhConfig(max(1, iterations - first), cov1,
                         seed.with_(chain=PILOT2_STREAM, proposal=0), early_reject),
                prior, backend, c1.theta[-1], init_estimate=c1.meta["final_estimate"],
                in_support=in_support)
    x2 = np.array([to_unbounded(t, prior)[0] for t in c2.theta])
    cov2 = _scaled_cov(np.vstack([x1[len(x1) // 2:], x2]), cov1)
    c2.n_sims += c1.n_sims
    c2.failures += c1.failures
    return cov2, c2


def run_with_pilot(prior: BoxPrior, backend, theta0, iterations: int, seed: SeedSpec,
                   in_support=None, pilot_fraction: float = PILOT_FRACTION,
                   early_reject: bool = False, init_scale: float = 0.1) -> Chain:
    """Pilot (``pilot_fraction`` of the budget) then the measured chain,
    started from the pilot's final state with its estimate.

    ``seed`` identifies the replicate; the pilot and main chains take their
    own stream indices under it.
    """
    n_pilot = max(2, int(round(pilot_fraction * iterations)))
    cov, pilot = pilot_proposal(prior, backend, theta0, n_pilot, seed, in_support,
                                init_scale, early_reject)
    chain = run_mh(MhConfig(iterations, cov, seed.with_(chain=MAIN_STREAM, proposal=0),
                            early_reject),
                   prior, backend, pilot.theta[-1], init_estimate=pilot.meta["final_estimate"],
                   in_support=in_support)
    chain.meta["pilot_sims"] = pilot.n_sims
    chain.meta["proposal_cov"] = cov
    chain.meta["pilot_acceptance"] = pilot.acceptance_rate
    return chain
