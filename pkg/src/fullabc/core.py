"""Domain types shared by every other module: samples, box priors, the
logit reparameterisation used by the sampler, and seeded random streams."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Reserved chain indices inside a replicate's stream space.
DATA_STREAM = 0
PILOT_STREAM = 1
MAIN_STREAM = 2
CALIBRATION_STREAM = 3
WEIGHT_STREAM = 4
TUNING_STREAM = 5
FIT_STREAM = 6
PILOT2_STREAM = 7


class BoundaryError(ValueError):
    """A parameter lies on or outside its prior box."""


def as_sample(values, name: str = "sample") -> np.ndarray:
    """Validate and freeze a univariate sample.

    Returns a read-only float64 copy so a sample cannot change length or
    contents after construction.
    """
    arr = np.array(values, dtype=float).ravel()
    if arr.size < 1:
        raise ValueError(f"{name} must contain at least one observation")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a structured stream id.

    Identical specs give bit-identical draws; any change in the stream id
    gives an independent stream (SeedSequence spawn keys hash the id).
    """

    master: int
    replicate: int = 0
    chain: int = 0
    proposal: int = 0

    def with_(self, **kwargs) -> "SeedSpec":
        fields = dict(master=self.master, replicate=self.replicate,
                      chain=self.chain, proposal=self.proposal)
        fields.update(kwargs)
        return SeedSpec(**fields)

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            self.master, spawn_key=(self.replicate, self.chain, self.proposal))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ParamVector:
    """Named point in parameter space."""

    names: tuple
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if len(self.names) < 1 or len(self.names) != vals.size:
            raise ValueError("names and values must have equal, non-zero length")
        vals.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", vals)

    def __getitem__(self, key):
        if isinstance(key, str):
            return float(self.values[self.names.index(key)])
        return self.values[key]

    def __len__(self):
        return len(self.names)

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in zip(self.names, self.values)}


@dataclass(frozen=True)
class BoxPrior:
    """Independent uniform prior on a rectangle."""

    names: tuple
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).ravel()
        hi = np.array(self.upper, dtype=float).ravel()
        if not (len(self.names) == lo.size == hi.size) or lo.size < 1:
            raise ValueError("names, lower and upper must have equal, non-zero length")
        if np.any(~(lo < hi)):
            raise ValueError("every lower bound must be strictly below its upper bound")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_bounds(cls, bounds: dict) -> "BoxPrior":
        names = tuple(bounds)
        lo = [bounds[k][0] for k in names]
        hi = [bounds[k][1] for k in names]
        return cls(names, lo, hi)

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, theta) -> bool:
        t = np.asarray(getattr(theta, "values", theta), dtype=float)
        return bool(np.all((t > self.lower) & (t < self.upper)))

    def logpdf(self, theta) -> float:
        if not self.contains(theta):
            return -np.inf
        return -float(np.sum(np.log(self.width)))

    def as_dict(self) -> dict:
        return {k: [float(a), float(b)] for k, a, b in zip(self.names, self.lower, self.upper)}


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def to_unbounded(theta, prior: BoxPrior):
    """Map a point strictly inside the box to R^d with a per-coordinate logit.

    Returns ``(x, log_jac)`` where ``log_jac`` is log|d theta / d x|, the
    Jacobian of the inverse map evaluated at ``x``.
    """
    t = np.asarray(getattr(theta, "values", theta), dtype=float)
    if t.shape != prior.lower.shape:
        raise ValueError("parameter dimension does not match the prior")
    u = (t - prior.lower) / prior.width
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise BoundaryError(f"parameter {t} is on or outside the prior box")
    x = np.log(u) - np.log1p(-u)
    return x, log_jacobian(x, prior)


def log_jacobian(x, prior: BoxPrior) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(np.log(prior.width) + _log_sigmoid(x) + _log_sigmoid(-x)))


def from_unbounded(x, prior: BoxPrior) -> ParamVector:
    """Inverse of :func:`to_unbounded`; the image is always strictly inside the box
    except where float rounding saturates the sigmoid."""
    x = np.asarray(x, dtype=float)
    # 1/(1+exp(-x)) written to stay accurate for large |x|
    u = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    return ParamVector(prior.names, prior.lower + prior.width * u)


def prior_sample(prior: BoxPrior, seed: SeedSpec | np.random.Generator) -> ParamVector:
    rng = seed.rng() if isinstance(seed, SeedSpec) else seed
    u = rng.random(prior.dim)
    return ParamVector(prior.names, prior.lower + prior.width * u)


def param_vector(names: Sequence[str], values) -> ParamVector:
    return ParamVector(tuple(names), values)
