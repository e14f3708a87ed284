"""Indirect-inference summaries from a univariate Gaussian mixture.

The mixture is parameterised without constraints as
    phi = (eta_1..eta_{K-1}, mu_1..mu_K, log v_1..log v_K),
with stick-breaking weights pi_k = sigmoid(eta_k) * prod_{l<k} (1 - sigmoid(eta_l))
and pi_K the remaining stick, so d_phi = 3K - 1. Components are kept in
ascending order of their means.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logsumexp

from .core import SeedSpec

LOG_2PI = np.log(2.0 * np.pi)


class GmmFitError(RuntimeError):
    """EM collapsed onto a degenerate component or never produced a valid fit."""


class IllConditionedFitError(RuntimeError):
    """Observed information is not positive definite."""


def weights_to_eta(weights):
    w = np.asarray(weights, dtype=float)
    eta = np.empty(w.size - 1)
    remaining = 1.0
    for k in range(w.size - 1):
        frac = w[k] / remaining
        frac = min(max(frac, 1e-300), 1.0 - 1e-16)
        eta[k] = np.log(frac) - np.log1p(-frac)
        remaining -= w[k]
    return eta


def eta_to_weights(eta):
    eta = np.asarray(eta, dtype=float)
    sig = expit(eta)
    w = np.empty(eta.size + 1)
    stick = 1.0
    for k in range(eta.size):
        w[k] = stick * sig[k]
        stick *= 1.0 - sig[k]
    w[-1] = stick
    return w


@dataclass(frozen=True)
class GaussianMixture:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    loglik: float = field(default=np.nan, compare=False)

    def __post_init__(self):
        w = np.asarray(self.weights, float)
        m = np.asarray(self.means, float)
        v = np.asarray(self.variances, float)
        if not (w.size == m.size == v.size) or w.size < 1:
            raise ValueError("weights, means and variances must align")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-10 or np.any(v <= 0):
            raise ValueError("need positive weights summing to one and positive variances")
        order = np.argsort(m, kind="stable")
        for name, arr in (("weights", w[order]), ("means", m[order]), ("variances", v[order])):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def K(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return 3 * self.K - 1

    @property
    def phi(self) -> np.ndarray:
        return np.concatenate([weights_to_eta(self.weights), self.means, np.log(self.variances)])

    @classmethod
    def from_phi(cls, phi, K: int) -> "GaussianMixture":
        phi = np.asarray(phi, float)
        return cls(eta_to_weights(phi[:K - 1]), phi[K - 1:2 * K - 1], np.exp(phi[2 * K - 1:]))

    def component_logpdf(self, z) -> np.ndarray:
        """n x K matrix of log(pi_k N(z_i; mu_k, v_k))."""
        z = np.asarray(z, float)[:, None]
        return (np.log(self.weights) - 0.5 * (LOG_2PI + np.log(self.variances))
                - 0.5 * (z - self.means) ** 2 / self.variances)

    def logpdf(self, z) -> np.ndarray:
        return logsumexp(self.component_logpdf(np.atleast_1d(z)), axis=1)

    def total_loglik(self, z) -> float:
        return float(np.sum(self.logpdf(z)))


def _eta_jacobian(eta, K):
    """A[k, j] = d log pi_k / d eta_j."""
    sig = expit(eta)
    A = np.zeros((K, K - 1))
    for k in range(K):
        for j in range(K - 1):
            if j < k:
                A[k, j] = -sig[j]
            elif j == k:
                A[k, j] = 1.0 - sig[j]
    return A


def _responsibilities(gm: GaussianMixture, z):
    lp = gm.component_logpdf(z)
    return np.exp(lp - logsumexp(lp, axis=1, keepdims=True))


def score_at(z, fitted: GaussianMixture) -> np.ndarray:
    """Gradient of sum_i log p(z_i | phi) at the fitted phi."""
    z = np.asarray(z, float).ravel()
    K = fitted.K
    R = _responsibilities(fitted, z)
    dev = z[:, None] - fitted.means
    v = fitted.variances
    g_eta = R.sum(axis=0) @ _eta_jacobian(weights_to_eta(fitted.weights), K)
    g_mu = np.sum(R * dev / v, axis=0)
    g_s = np.sum(R * 0.5 * (dev * dev / v - 1.0), axis=0)
    return np.concatenate([g_eta, g_mu, g_s])


def score_batch(Z, fitted: GaussianMixture) -> np.ndarray:
    """Scores for each row of a (m, n) array of datasets."""
    Z = np.atleast_2d(np.asarray(Z, float))
    m, n = Z.shape
    K = fitted.K
    lp = fitted.component_logpdf(Z.ravel()).reshape(m, n, K)
    R = np.exp(lp - logsumexp(lp, axis=2, keepdims=True))
    dev = Z[:, :, None] - fitted.means
    v = fitted.variances
    g_eta = R.sum(axis=1) @ _eta_jacobian(weights_to_eta(fitted.weights), K)
    g_mu = np.sum(R * dev / v, axis=1)
    g_s = np.sum(R * 0.5 * (dev * dev / v - 1.0), axis=1)
    return np.concatenate([g_eta, g_mu, g_s], axis=1)


def _hessian(z, gm: GaussianMixture) -> np.ndarray:
    """Analytic Hessian of the mixture log-likelihood in phi."""
    z = np.asarray(z, float).ravel()
    n, K = z.size, gm.K
    d = 3 * K - 1
    eta = weights_to_eta(gm.weights)
    A = _eta_jacobian(eta, K)
    sig = expit(eta)
    R = _responsibilities(gm, z)
    dev = z[:, None] - gm.means
    v = gm.variances
    # per observation, per component gradient of log(pi_k N_k)
    G = np.zeros((n, K, d))
    G[:, :, :K - 1] = A[None, :, :]
    kk = np.arange(K)
    G[:, kk, K - 1 + kk] = dev / v
    G[:, kk, 2 * K - 1 + kk] = 0.5 * (dev * dev / v - 1.0)
    g = np.einsum("ik,ikd->id", R, G)
    H = np.einsum("ik,ikd,ike->de", R, G, G) - g.T @ g
    # second derivatives of log(pi_k N_k)
    Rsum = R.sum(axis=0)
    for j in range(K - 1):
        # log pi_k depends on eta_j through log sig_j (k == j) or log(1 - sig_j) (k > j)
        H[j, j] += -sig[j] * (1.0 - sig[j]) * Rsum[j:].sum()
    H[K - 1 + kk, K - 1 + kk] += -Rsum / v
    cross = -np.sum(R * dev / v, axis=0)
    H[K - 1 + kk, 2 * K - 1 + kk] += cross
    H[2 * K - 1 + kk, K - 1 + kk] += cross
    H[2 * K - 1 + kk, 2 * K - 1 + kk] += -0.5 * np.sum(R * dev * dev / v, axis=0)
    return H


def observed_information(y, fitted: GaussianMixture) -> np.ndarray:
    """Negative Hessian of the log-likelihood at the fit, symmetrised and
    checked for positive definiteness."""
    J = -_hessian(y, fitted)
    J = 0.5 * (J + J.T)
    if not np.all(np.isfinite(J)):
        raise IllConditionedFitError("observed information has non-finite entries")
    try:
        np.linalg.cholesky(J)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedFitError("observed information is not positive definite") from exc
    return J


def mahalanobis(s, J) -> float:
    """sqrt(s' J^{-1} s)."""
    s = np.asarray(s, float)
    try:
        L = np.linalg.cholesky(np.asarray(J, float))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("weighting matrix is singular or indefinite") from exc
    u = np.linalg.solve(L, s)
    return float(np.sqrt(u @ u))


def weighted_euclidean(s, t, weights) -> float:
    d = (np.asarray(s, float) - np.asarray(t, float)) * np.asarray(weights, float)
    return float(np.sqrt(d @ d))


def _em(y, w, m, v, max_iter, tol, var_floor):
    n = y.size
    prev = -np.inf
    trace = []
    for _ in range(max_iter):
        lp = (np.log(w) - 0.5 * (LOG_2PI + np.log(v)) - 0.5 * (y[:, None] - m) ** 2 / v)
        norm = logsumexp(lp, axis=1, keepdims=True)
        ll = float(norm.sum())
        trace.append(ll)
        R = np.exp(lp - norm)
        Nk = R.sum(axis=0)
        if np.any(Nk < 1.0):
            raise GmmFitError("a component lost its support")
        w = Nk / n
        m = (R * y[:, None]).sum(axis=0) / Nk
        v = (R * (y[:, None] - m) ** 2).sum(axis=0) / Nk
        if np.any(v < var_floor):
            raise GmmFitError("component variance collapsed")
        if abs(ll - prev) <= tol * abs(ll):
            break
        prev = ll
    return w, m, v, trace


def _coincident(gm: GaussianMixture, scale: float) -> bool:
    """True when two components are numerically the same Gaussian, a
    symmetric saddle point of the likelihood rather than a K-component fit."""
    dm = np.abs(np.diff(gm.means))  # means are sorted
    dv = np.abs(np.diff(np.log(gm.variances)))
    return bool(np.any((dm < 1e-6 * scale) & (dv < 1e-6)))


def _newton_polish(y, gm: GaussianMixture, max_iter: int = 30) -> GaussianMixture:
    K = gm.K
    best = gm
    best_ll = gm.total_loglik(y)
    for _ in range(max_iter):
        g = score_at(y, best)
        if np.max(np.abs(g)) < 1e-10 * max(1.0, y.size):
            break
        H = _hessian(y, best)
        try:
            np.linalg.cholesky(-H)
        except np.linalg.LinAlgError:
            break
        step = np.linalg.solve(-H, g)
        t = 1.0
        phi = best.phi
        improved = False
        while t > 1e-6:
            try:
                cand = GaussianMixture.from_phi(phi + t * step, K)
                ll = cand.total_loglik(y)
            except ValueError:
                ll = -np.inf
            if np.isfinite(ll) and ll >= best_ll - 1e-12 * abs(best_ll):
                best, best_ll, improved = cand, ll, True
                break
            t *= 0.5
        if not improved:
            break
    return GaussianMixture(best.weights, best.means, best.variances, best_ll)


def fit_gmm(y, K: int, seed: SeedSpec | np.random.Generator | None = None,
            restarts: int = 10, max_iter: int = 500, tol: float = 1e-10,
            init=None, return_trace: bool = False):
    """Maximum-likelihood mixture fit: best of ``restarts`` seeded EM runs,
    then Newton polishing so the score at the fit is numerically zero.

    ``init`` optionally gives one (weights, means, variances) starting point
    and replaces the random restarts.
    """
    y = np.asarray(y, float).ravel()
    if K < 1:
        raise ValueError("K must be >= 1")
    if y.size <= 3 * K:
        raise ValueError(f"need more than {3 * K} observations for K={K}")
    var_y = float(np.var(y))
    if not var_y > 0:
        raise GmmFitError("data has zero variance")
    if K == 1:
        gm = GaussianMixture(np.ones(1), np.array([y.mean()]), np.array([var_y]))
        gm = GaussianMixture(gm.weights, gm.means, gm.variances, gm.total_loglik(y))
        return (gm, [gm.loglik]) if return_trace else gm
    rng = seed.rng() if isinstance(seed, SeedSpec) else (seed or np.random.default_rng(0))
    var_floor = 1e-6 * var_y
    starts = []
    if init is not None:
        starts.append(tuple(np.asarray(a, float) for a in init))
    else:
        qs = np.quantile(y, (np.arange(K) + 0.5) / K)
        starts.append((np.full(K, 1.0 / K), qs, np.full(K, var_y / K)))
        for _ in range(restarts - 1):
            m0 = np.sort(rng.choice(y, size=K, replace=False))
            starts.append((np.full(K, 1.0 / K), m0, np.full(K, var_y)))
    best, best_trace = None, None
    for w0, m0, v0 in starts:
        try:
            w, m, v, trace = _em(y, w0, m0, v0, max_iter, tol, var_floor)
            gm = GaussianMixture(w, m, v)
        except (GmmFitError, ValueError, FloatingPointError):
            continue
        if _coincident(gm, np.sqrt(var_y)):
            continue
        ll = gm.total_loglik(y)
        if best is None or ll > best.loglik:
            best = GaussianMixture(gm.weights, gm.means, gm.variances, ll)
            best_trace = trace
    if best is None:
        raise GmmFitError(f"every EM restart degenerated for K={K}")
    best = _newton_polish(y, best)
    if (np.any(best.variances < var_floor) or np.any(best.weights * y.size < 1.0)
            or _coincident(best, np.sqrt(var_y))):
        raise GmmFitError("fit converged to a degenerate component")
    return (best, best_trace) if return_trace else best


@dataclass(frozen=True)
class ScoreSummary:
    """Observed-data fit plus the weighting matrix used by summary ABC."""

    fitted: GaussianMixture
    information: np.ndarray

    @property
    def dim(self) -> int:
        return self.fitted.dim

    def __call__(self, z) -> np.ndarray:
        return score_at(z, self.fitted)

    def distance(self, s) -> float:
        return mahalanobis(s, self.information)


def fit_score_summary(y, K: int = 3, seed=None, min_K: int = 2) -> ScoreSummary:
    """Fit the auxiliary mixture to observed data, falling back to fewer
    components when the fit or its information matrix is numerically bad."""
    last = None
    for k in range(K, min_K - 1, -1):
        try:
            gm = fit_gmm(y, k, seed)
            return ScoreSummary(gm, observed_information(y, gm))
        except (GmmFitError, IllConditionedFitError) as exc:
            last = exc
    raise GmmFitError(f"no usable mixture fit with {min_K}..{K} components") from last
