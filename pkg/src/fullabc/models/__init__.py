"""Generative models and a small registry the experiment harness draws on."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core import BoxPrior
from .gandk import GandKParams, gandk_logpdf, gandk_quantile, gandk_simulate
from .mg1 import N_CUSTOMERS, Mg1Params, event_list_departures, lindley_departures, mg1_simulate
from .stable import stable_sample
from .stereo import StereoData, StereoParams, stereo_simple_summaries, stereo_simulate
from .toad import (ToadParams, ToadSummary, toad_quantile_summaries, toad_simulate,
                   toad_summarize)
from . import toy

__all__ = [
    "Model", "MODELS", "get_model",
    "GandKParams", "gandk_logpdf", "gandk_quantile", "gandk_simulate",
    "Mg1Params", "mg1_simulate", "lindley_departures", "event_list_departures",
    "stable_sample", "StereoData", "StereoParams", "stereo_simulate", "stereo_simple_summaries",
    "ToadParams", "ToadSummary", "toad_simulate", "toad_summarize", "toad_quantile_summaries",
]


@dataclass(frozen=True)
class Model:
    """What the harness needs to know about a simulator.

    ``simulate(theta, rng, n)`` returns one dataset. For univariate models
    ``simulate_many(theta, rng, m, n)`` returns an (m, n) array of
    independent datasets.
    """

    name: str
    param_names: tuple
    kind: str  # "univariate", "stereo" or "toad"
    simulate: Callable
    prior_fn: Callable
    true_theta: tuple
    default_n: int | None = None
    simulate_many: Callable | None = None
    in_support: Callable | None = None
    positive: bool = False
    methods: tuple = field(default=())

    def prior(self, y=None) -> BoxPrior:
        return self.prior_fn(y)


def _box(names, bounds):
    return BoxPrior(names, [b[0] for b in bounds], [b[1] for b in bounds])


GANDK_NAMES = ("a", "b", "g", "k")
MG1_NAMES = ("theta1", "theta2", "theta3")
STEREO_NAMES = ("lam", "sigma", "xi")
TOAD_NAMES = ("alpha", "scale", "p0")

UNIVARIATE_METHODS = ("cvm", "wass", "mmd", "energy", "kl", "kde", "abc", "bsl")


def _gandk_many(theta, rng, m, n):
    return gandk_simulate(m * n, theta, rng).reshape(m, n)


def _mg1_prior(y):
    if y is None:
        raise ValueError("the M/G/1 prior depends on the observed data")
    ymin = float(np.min(y))
    return _box(MG1_NAMES, [(0.0, ymin), (0.0, 10.0 + ymin), (0.0, 0.5)])


def _mg1_support(theta):
    return theta[0] < theta[1]


MODELS = {
    "gandk": Model(
        "gandk", GANDK_NAMES, "univariate",
        simulate=lambda theta, rng, n: gandk_simulate(n, theta, rng),
        prior_fn=lambda y: _box(GANDK_NAMES, [(0, 5), (0, 5), (0, 10), (0, 1)]),
        true_theta=(3.0, 1.0, 2.0, 0.5), default_n=100,
        simulate_many=_gandk_many, methods=UNIVARIATE_METHODS,
    ),
    "mg1": Model(
        "mg1", MG1_NAMES, "univariate",
        simulate=lambda theta, rng, n=None: mg1_simulate(theta, rng),
        prior_fn=_mg1_prior, true_theta=(1.0, 5.0, 0.2), default_n=N_CUSTOMERS - 1,
        simulate_many=lambda theta, rng, m, n=None: mg1_simulate(theta, rng, size=m),
        in_support=_mg1_support, positive=True, methods=UNIVARIATE_METHODS,
    ),
    "stereo": Model(
        "stereo", STEREO_NAMES, "stereo",
        simulate=lambda theta, rng, n=None: stereo_simulate(theta, rng),
        prior_fn=lambda y: _box(STEREO_NAMES, [(30, 200), (0, 15), (-3, 3)]),
        true_theta=(100.0, 2.0, -0.1), positive=True,
        methods=("cvm", "wass", "mmd", "energy", "kl", "kde", "abc", "abc-simple", "bsl"),
    ),
    "toad": Model(
        "toad", TOAD_NAMES, "toad",
        simulate=lambda theta, rng, n=None: toad_simulate(theta, rng),
        prior_fn=lambda y: _box(TOAD_NAMES, [(1.0, 2.0), (0.0, 100.0), (0.0, 0.9)]),
        true_theta=(1.7, 35.0, 0.6), positive=True,
        methods=("cvm", "wass", "mmd", "energy", "kl", "abc", "bsl"),
    ),
    "gaussian": Model(
        "gaussian", ("mu",), "univariate",
        simulate=lambda theta, rng, n: toy.gaussian_mean_simulate(theta, rng, n),
        prior_fn=lambda y: _box(("mu",), [(-10.0, 10.0)]),
        true_theta=(0.0,), default_n=20,
        simulate_many=lambda theta, rng, m, n: toy.gaussian_mean_simulate(theta, rng, n, size=m),
        methods=UNIVARIATE_METHODS,
    ),
    "exponential": Model(
        "exponential", ("rate",), "univariate",
        simulate=lambda theta, rng, n: toy.exponential_simulate(theta, rng, n),
        prior_fn=lambda y: _box(("rate",), [(0.0, 20.0)]),
        true_theta=(1.0,), default_n=50, positive=True,
        simulate_many=lambda theta, rng, m, n: toy.exponential_simulate(theta, rng, n, size=m),
        methods=UNIVARIATE_METHODS,
    ),
}


def get_model(name: str) -> Model:
    try:
        return MODELS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
