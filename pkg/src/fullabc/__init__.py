"""Likelihood-free Bayesian inference with full-data distances, kernel density
likelihoods, synthetic likelihoods and auxiliary-model score summaries."""

from .core import BoundaryError, BoxPrior, ParamVector, SeedSpec, from_unbounded, to_unbounded
from .distances import (CompositeDistance, DistanceSpec, cvm_distance, energy_distance, kl_1nn,
                        mmd2, wasserstein1)
from .likelihoods import AbcLikelihood, BslLikelihood, KdeLikelihood, LikelihoodEstimate
from .sampler import Chain, MhConfig, ess, run_mh, run_with_pilot

__version__ = "0.1.0"
