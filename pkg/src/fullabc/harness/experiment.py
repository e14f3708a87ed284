"""Repeated-simulation studies: configuration, method construction,
calibration, replicate runs and on-disk outputs."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from ..core import (CALIBRATION_STREAM, DATA_STREAM, FIT_STREAM, TUNING_STREAM, WEIGHT_STREAM,
                    BoxPrior, SeedSpec)
from ..distances import CompositeDistance, DistanceSpec, calibrate_weights
from ..likelihoods import (AbcLikelihood, BslLikelihood, KdeLikelihood, StereoKdeLikelihood)
from ..models import Model, get_model
from ..models import io as model_io
from ..models.stereo import StereoData, stereo_simple_summaries
from ..models.toad import LAGS, SummaryError, toad_quantile_summaries, toad_summarize
from ..sampler import RECOVERABLE_ERRORS, ess, run_with_pilot
from ..summaries import (GmmFitError, fit_score_summary, mahalanobis, score_at, score_batch,
                         weighted_euclidean)
from .calibration import discrepancy_pool, epsilon_from_pool, tune_bsl_m
from .metrics import ReplicateResult, compute_metrics, save_results, summarize_samples

log = logging.getLogger(__name__)

DISTANCE_METHODS = {"cvm": "cvm", "wass": "wasserstein1", "mmd": "mmd",
                    "energy": "energy", "kl": "kl1nn"}
ABC_METHODS = set(DISTANCE_METHODS) | {"abc", "abc-simple"}
METHODS = tuple(DISTANCE_METHODS) + ("kde", "abc", "abc-simple", "bsl")
TRANSFORMS = ("raw", "log")
EPSILON_SCOPES = ("replicate", "study")

# stream-space replicate index reserved for the calibration dataset
CALIBRATION_REPLICATE = 1_000_000_000

BSL_M_GRID = (50, 100, 200, 500, 1000)
DEFAULT_KDE_M = 20

# errors that exclude a replicate instead of aborting the study
REPLICATE_ERRORS = RECOVERABLE_ERRORS + (GmmFitError, SummaryError)


@dataclass
class ExperimentConfig:
    """One (model, method, transform) study.

    ``theta_true`` defaults to the model's reference value for simulated
    studies; set ``dataset`` instead for a real-data run. ``m`` is the
    per-estimate simulation count for KDE and BSL; ``"auto"`` tunes BSL m.
    With ``epsilon_scope="replicate"`` each simulated replicate gets its own
    ABC tolerance, a q-quantile of discrepancies to its own dataset;
    ``"study"`` uses the single calibration-dataset tolerance throughout.
    """

    model: str
    method: str
    transform: str = "raw"
    replicates: int = 20
    n: int | None = None
    theta_true: list | None = None
    dataset: str | None = None
    iterations: int = 20_000
    seed: int = 0
    q: float = 0.01
    pool: int = 10_000
    epsilon_scope: str = "replicate"
    m: int | str | None = None
    m_grid: list = field(default_factory=lambda: list(BSL_M_GRID))
    tuning_repeats: int = 50
    kde_recycle: bool = True
    bandwidth: float | None = None
    kernel: str = "gaussian"
    K: int = 3
    robust_weights: bool = False
    weight_pool: int = 1000
    theta_central: list | None = None
    pilot_fraction: float = 0.1
    burn_in: float = 0.2
    workers: int = 1

    def __post_init__(self):
        model = get_model(self.model)
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.method not in model.methods:
            raise ValueError(f"method {self.method!r} is not available for model {self.model!r}")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"transform must be one of {TRANSFORMS}")
        if self.transform == "log" and not model.positive:
            raise ValueError(f"model {self.model!r} is not positive; log transform undefined")
        if self.transform == "log" and model.kind == "toad" and self.method in ("abc", "bsl"):
            raise ValueError("toad quantile summaries are already on a log scale")
        if self.dataset is not None and self.theta_true is not None:
            raise ValueError("give either a dataset (real study) or theta_true, not both")
        if self.dataset is not None:
            self.replicates = 1
        if self.replicates < 1 or self.iterations < 1:
            raise ValueError("replicates and iterations must be positive")
        if not 0 < self.q <= 1:
            raise ValueError("q must lie in (0, 1]")
        if self.epsilon_scope not in EPSILON_SCOPES:
            raise ValueError(f"epsilon_scope must be one of {EPSILON_SCOPES}")
        if self.theta_true is None and self.dataset is None:
            self.theta_true = list(model.true_theta)
        if self.n is None:
            self.n = model.default_n

    @property
    def real_data(self) -> bool:
        return self.dataset is not None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Read YAML or JSON. A run manifest is accepted too: its embedded
        config is used, so re-running a manifest repeats the run exactly."""
        text = Path(path).read_text()
        d = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
        if isinstance(d, dict) and "config" in d and "model" not in d:
            d = d["config"]
        return cls.from_dict(d)


@dataclass
class Calibration:
    """Quantities fixed once per study before any replicate runs."""

    epsilon: float | None = None
    m: int | None = None
    weights: list | None = None
    m_sds: list | None = None
    n_sims: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------- data


def load_dataset(model: Model, path):
    if model.kind == "stereo":
        return model_io.read_stereo(path)
    if model.kind == "toad":
        return model_io.read_toad_matrix(path)
    return model_io.read_sample(path)


def save_dataset(model: Model, path, data) -> None:
    if model.kind == "stereo":
        model_io.write_stereo(path, data)
    elif model.kind == "toad":
        model_io.write_toad_matrix(path, data)
    else:
        model_io.write_sample(path, data)


def simulate_dataset(model: Model, theta, n, seed: SeedSpec):
    return model.simulate(np.asarray(theta, float), seed.rng(), n)


def _transform(name: str) -> Callable | None:
    return np.log if name == "log" else None


def _identity(x):
    return x


# ---------------------------------------------------------------- per-model statistics


def _stereo_scores(data: StereoData, fitted, obs_count: int, T) -> np.ndarray:
    sizes = T(data.sizes)
    gmm = score_at(sizes, fitted) if sizes.size else np.zeros(fitted.dim)
    return np.concatenate([[data.count - obs_count], gmm])


def _stereo_score_setup(y: StereoData, cfg, seed: SeedSpec):
    T = _transform(cfg.transform) or _identity
    ss = fit_score_summary(T(y.sizes), cfg.K, seed)
    J = np.zeros((ss.dim + 1, ss.dim + 1))
    # Poisson auxiliary for the count, parameterised by its log rate
    J[0, 0] = max(y.count, 1)
    J[1:, 1:] = ss.information
    stat = lambda z: _stereo_scores(z, ss.fitted, y.count, T)
    return stat, J, stat(y)


def _summary_stat_fn(model: Model, cfg):
    """Summary map for the weighted-Euclidean summary methods."""
    if model.kind == "toad":
        return lambda Y: toad_quantile_summaries(toad_summarize(Y))
    if model.kind == "stereo":
        return stereo_simple_summaries
    raise ValueError(f"no fixed summary set for model {model.name!r}")


def _distance_parts(model: Model, cfg) -> CompositeDistance | DistanceSpec:
    spec = DistanceSpec(DISTANCE_METHODS[cfg.method],
                        transform="log" if cfg.transform == "log" else "identity",
                        kernel=cfg.kernel, bandwidth=cfg.bandwidth)
    if model.kind == "univariate":
        return spec
    piece = DistanceSpec(spec.kind, spec.transform, kernel=cfg.kernel, bandwidth=cfg.bandwidth,
                         allow_unequal=True)
    n_lags = 1 if model.kind == "stereo" else len(LAGS)
    return CompositeDistance((DistanceSpec("l1"), piece) * n_lags)


def _pieces(model: Model, data):
    if model.kind == "stereo":
        return data.pieces()
    if model.kind == "toad":
        return toad_summarize(data).pieces()
    return data


# ---------------------------------------------------------------- discrepancies


def _needs_weights(model: Model, cfg) -> bool:
    return (cfg.method in DISTANCE_METHODS and model.kind != "univariate") or \
        cfg.method == "abc-simple" or (cfg.method == "abc" and model.kind == "toad")


def make_discrepancy(model: Model, cfg: ExperimentConfig, y, weights, seed: SeedSpec) -> Callable:
    """Discrepancy ``rho(z)`` between observed ``y`` and a simulated dataset."""
    if cfg.method in DISTANCE_METHODS:
        parts = _distance_parts(model, cfg)
        if model.kind == "univariate":
            bound = parts.bind(y)
            return lambda z: bound(y, z)
        yp = _pieces(model, y)
        bound = parts.with_weights(weights).bind(yp)
        return lambda z: bound(yp, _pieces(model, z))
    if cfg.method == "abc" and model.kind == "univariate":
        T = _transform(cfg.transform) or _identity
        ss = fit_score_summary(T(y), cfg.K, seed)
        s_obs = ss(T(y))
        return lambda z: mahalanobis(ss(T(z)) - s_obs, ss.information)
    if cfg.method == "abc" and model.kind == "stereo":
        stat, J, s_obs = _stereo_score_setup(y, cfg, seed)
        return lambda z: mahalanobis(stat(z) - s_obs, J)
    if cfg.method in ("abc", "abc-simple"):
        stat = _summary_stat_fn(model, cfg)
        s_obs = stat(y)
        return lambda z: weighted_euclidean(stat(z), s_obs, weights)
    raise ValueError(f"method {cfg.method!r} has no discrepancy")


def _safe(fn):
    def wrapped(z):
        try:
            return fn(z)
        except REPLICATE_ERRORS:
            return np.inf
    return wrapped


def calibrate_weights_for(model: Model, cfg: ExperimentConfig, y, theta_c, seed: SeedSpec):
    """Inverse-scale weights from datasets simulated at ``theta_c``: per
    composite part for distance methods, per statistic for summary methods."""
    rng = seed.rng()
    theta_c = np.asarray(theta_c, float)
    rows = []
    if cfg.method in DISTANCE_METHODS:
        parts = _distance_parts(model, cfg)
        yp = _pieces(model, y)
        bound = parts.bind(yp)
        for _ in range(cfg.weight_pool):
            try:
                rows.append(bound.individual(yp, _pieces(model, model.simulate(theta_c, rng, cfg.n))))
            except REPLICATE_ERRORS:
                continue
    else:
        stat = _summary_stat_fn(model, cfg)
        for _ in range(cfg.weight_pool):
            try:
                rows.append(stat(model.simulate(theta_c, rng, cfg.n)))
            except REPLICATE_ERRORS:
                continue
    if len(rows) < 2:
        raise RuntimeError("weight calibration produced fewer than two usable simulations")
    return calibrate_weights(np.asarray(rows).T, robust=cfg.robust_weights).tolist()


# ---------------------------------------------------------------- backends


def _bsl_stats_fn(model: Model, cfg, y, seed: SeedSpec):
    """(simulate_stats(theta, rng, m), observed statistic) for BSL."""
    n = cfg.n
    if model.kind == "univariate":
        T = _transform(cfg.transform) or _identity
        ss = fit_score_summary(T(y), cfg.K, seed)
        return (lambda th, rng, m: score_batch(T(model.simulate_many(th, rng, m, n)), ss.fitted),
                ss(T(y)))
    if model.kind == "stereo":
        stat, _, s_obs = _stereo_score_setup(y, cfg, seed)
    else:
        stat = _summary_stat_fn(model, cfg)
        s_obs = stat(y)
    return (lambda th, rng, m: np.array([stat(model.simulate(th, rng, n)) for _ in range(m)]),
            s_obs)


def make_backend(model: Model, cfg: ExperimentConfig, y, calib: Calibration, seed: SeedSpec):
    """Likelihood backend for one observed dataset. ``seed`` drives any
    auxiliary-model fitting."""
    if cfg.method in ABC_METHODS:
        disc = make_discrepancy(model, cfg, y, calib.weights, seed)
        sim = lambda th, rng: model.simulate(th, rng, cfg.n)
        return AbcLikelihood(sim, disc, calib.epsilon, signed=cfg.method == "mmd")
    if cfg.method == "bsl":
        fn, s_obs = _bsl_stats_fn(model, cfg, y, seed)
        return BslLikelihood(fn, s_obs, calib.m)
    if cfg.method == "kde":
        T = _transform(cfg.transform)
        if model.kind == "stereo":
            return StereoKdeLikelihood(lambda th, rng: model.simulate(th, rng), y.count, y.sizes,
                                       calib.m, cfg.bandwidth, T)
        return KdeLikelihood(lambda th, rng, m: model.simulate_many(th, rng, m, cfg.n),
                             np.asarray(y, float), calib.m, cfg.bandwidth, cfg.kde_recycle, T)
    raise ValueError(f"unknown method {cfg.method!r}")


# ---------------------------------------------------------------- calibration


def _cal_seed(cfg, chain: int) -> SeedSpec:
    return SeedSpec(cfg.seed, CALIBRATION_REPLICATE, chain)


def calibration_data(model: Model, cfg: ExperimentConfig):
    if cfg.real_data:
        return load_dataset(model, cfg.dataset)
    return simulate_dataset(model, cfg.theta_true, cfg.n, _cal_seed(cfg, DATA_STREAM))


def central_theta(model: Model, cfg: ExperimentConfig, y) -> np.ndarray:
    if cfg.theta_central is not None:
        return np.asarray(cfg.theta_central, float)
    if cfg.theta_true is not None:
        return np.asarray(cfg.theta_true, float)
    return model.prior(y).midpoint


def _epsilon(model: Model, cfg, disc, theta_c, seed: SeedSpec) -> float:
    pool = discrepancy_pool(lambda rng: model.simulate(theta_c, rng, cfg.n), _safe(disc),
                            cfg.pool, seed)
    eps = epsilon_from_pool(pool, cfg.q)
    if not (eps > 0 or (cfg.method == "mmd" and np.isfinite(eps))):
        raise RuntimeError("calibrated tolerance is zero; raise q or the pool size")
    return eps


def calibrate(cfg: ExperimentConfig) -> Calibration:
    """Fix weights, tolerance or m once per study, on a calibration dataset
    drawn at the true parameter (or the real dataset)."""
    model = get_model(cfg.model)
    y = calibration_data(model, cfg)
    theta_c = central_theta(model, cfg, y)
    calib = Calibration()
    if cfg.method in ABC_METHODS:
        if _needs_weights(model, cfg):
            calib.weights = calibrate_weights_for(model, cfg, y, theta_c,
                                                  _cal_seed(cfg, WEIGHT_STREAM))
            calib.n_sims += cfg.weight_pool
        disc = make_discrepancy(model, cfg, y, calib.weights, _cal_seed(cfg, FIT_STREAM))
        calib.epsilon = _epsilon(model, cfg, disc, theta_c, _cal_seed(cfg, CALIBRATION_STREAM))
        calib.n_sims += cfg.pool
    elif cfg.method == "bsl":
        if cfg.m in (None, "auto"):
            fn, s_obs = _bsl_stats_fn(model, cfg, y, _cal_seed(cfg, FIT_STREAM))
            calib.m, calib.m_sds = tune_bsl_m(lambda m: BslLikelihood(fn, s_obs, m), theta_c,
                                              cfg.m_grid, _cal_seed(cfg, TUNING_STREAM),
                                              cfg.tuning_repeats)
            calib.n_sims += cfg.tuning_repeats * int(np.sum(cfg.m_grid))
        else:
            calib.m = int(cfg.m)
    else:
        calib.m = DEFAULT_KDE_M if cfg.m in (None, "auto") else int(cfg.m)
    return calib


# ---------------------------------------------------------------- replicates


def _start(prior: BoxPrior, theta, in_support) -> np.ndarray:
    theta = np.asarray(theta, float)
    if prior.contains(theta) and (in_support is None or in_support(theta)):
        return theta
    return prior.midpoint


def run_replicate(cfg: ExperimentConfig, calib: Calibration, r: int):
    """One dataset, one pilot-tuned chain. Returns (ReplicateResult, Chain)."""
    model = get_model(cfg.model)
    if cfg.real_data:
        y = load_dataset(model, cfg.dataset)
    else:
        y = simulate_dataset(model, cfg.theta_true, cfg.n, SeedSpec(cfg.seed, r, DATA_STREAM))
    prior = model.prior(y)
    backend = make_backend(model, cfg, y, calib, SeedSpec(cfg.seed, r, FIT_STREAM))
    theta_c = central_theta(model, cfg, y)
    cal_sims = 0
    if (cfg.method in ABC_METHODS and cfg.epsilon_scope == "replicate" and not cfg.real_data
            and np.isfinite(calib.epsilon)):
        backend.epsilon = _epsilon(model, cfg, backend.discrepancy, theta_c,
                                   SeedSpec(cfg.seed, r, CALIBRATION_STREAM))
        cal_sims = cfg.pool
    theta0 = _start(prior, theta_c, model.in_support)
    chain = run_with_pilot(prior, backend, theta0, cfg.iterations, SeedSpec(cfg.seed, r),
                           in_support=model.in_support, pilot_fraction=cfg.pilot_fraction,
                           early_reject=cfg.method in ABC_METHODS)
    post = chain.post_burn_in(cfg.burn_in)
    meta = {
        "acceptance": chain.acceptance_rate,
        "pilot_acceptance": chain.meta["pilot_acceptance"],
        "n_sims": int(chain.n_sims + chain.meta["pilot_sims"] + cal_sims),
        "failures": int(chain.failures),
        "ess": [ess(post[:, j]) if len(post) >= 100 else float("nan")
                for j in range(post.shape[1])],
        "prior": prior.as_dict(),
    }
    if cfg.method in ABC_METHODS:
        meta["epsilon"] = backend.epsilon
    return summarize_samples(post, prior.names, r, meta), chain


def _run_replicate_safe(cfg, calib, r):
    try:
        return r, run_replicate(cfg, calib, r), None
    except REPLICATE_ERRORS as exc:
        return r, None, f"{type(exc).__name__}: {exc}"


def run_replicates(cfg: ExperimentConfig, calib: Calibration | None = None):
    """Run every replicate. Returns (results, chains, failures) with results
    and chains sorted by replicate index; failures map index -> message."""
    calib = calibrate(cfg) if calib is None else calib
    idx = range(cfg.replicates)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            outs = list(pool.map(_run_replicate_safe, [cfg] * cfg.replicates,
                                 [calib] * cfg.replicates, idx))
    else:
        outs = [_run_replicate_safe(cfg, calib, r) for r in idx]
    results, chains, failures = [], {}, {}
    for r, out, err in sorted(outs, key=lambda o: o[0]):
        if out is None:
            failures[r] = err
            continue
        results.append(out[0])
        chains[r] = out[1]
    if failures:
        log.warning("%d of %d replicates failed and were excluded", len(failures), cfg.replicates)
    return results, chains, failures


def run_experiment(cfg: ExperimentConfig, out_dir) -> dict:
    """Calibrate, run all replicates and write chains, results, metrics and
    a manifest into ``out_dir``. Returns the manifest."""
    out = Path(out_dir)
    (out / "chains").mkdir(parents=True, exist_ok=True)
    calib = calibrate(cfg)
    results, chains, failures = run_replicates(cfg, calib)
    for r, chain in chains.items():
        chain.to_csv(out / "chains" / f"replicate_{r:04d}.csv")
    save_results(out / "results.json", results)
    manifest = {
        "config": cfg.to_dict(),
        "calibration": calib.to_dict(),
        "seeds": {"master": cfg.seed, "calibration_replicate": CALIBRATION_REPLICATE,
                  "replicates": sorted(chains)},
        "replicates_completed": len(results),
        "failures": {str(k): v for k, v in failures.items()},
        "simulations": {"calibration": calib.n_sims,
                        "per_replicate": {str(r.replicate): r.meta["n_sims"] for r in results}},
        "ess": {str(r.replicate): r.meta["ess"] for r in results},
    }
    if cfg.method in ABC_METHODS:
        manifest["epsilon"] = {str(r.replicate): r.meta["epsilon"] for r in results}
    if results and not cfg.real_data:
        compute_metrics(results, cfg.theta_true).to_csv(out / "metrics.csv")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return manifest
