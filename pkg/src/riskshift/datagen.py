"""Sampling of ground truths, Gaussian covariates, and labels.

Covariates are drawn as x ~ N(0, Sigma/d): a standard normal vector is rotated
into the shared eigenbasis, scaled by sqrt(eigenvalues), rotated back, and
divided by sqrt(d).  Labels support three generators: linear with additive
Gaussian noise, noisy signs (the sign of the clean score kept with probability
p), and noiseless linear scores.  sign(0) is +1 throughout.
"""

import math
from dataclasses import dataclass

import numpy as np

from riskshift.errors import InvalidDimensionError, NumericInputError
from riskshift.shiftmodel import _select_side
from riskshift.subspace import _frozen_array


@dataclass(frozen=True)
class GroundTruth:
    """Target vector beta* together with its per-coordinate variance scale."""

    beta_star: np.ndarray
    sigma_beta_sq: float

    def __post_init__(self):
        beta = np.asarray(self.beta_star, dtype=np.float64)
        if beta.ndim != 1 or beta.size == 0:
            raise InvalidDimensionError("beta_star must be a nonempty 1-d vector")
        if not np.all(np.isfinite(beta)):
            raise NumericInputError("beta_star must be finite")
        if not (math.isfinite(self.sigma_beta_sq) and self.sigma_beta_sq > 0):
            raise NumericInputError("sigma_beta_sq must be a positive finite scalar")
        object.__setattr__(self, "beta_star", _frozen_array(beta))

    @property
    def d(self):
        return self.beta_star.size


@dataclass(frozen=True)
class LinearGaussian:
    """Labels y = x^T beta* + sigma * g with g standard normal."""

    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise NumericInputError("noise level sigma must be finite and >= 0")


@dataclass(frozen=True)
class NoisySign:
    """Labels are sign(x^T beta*), flipped independently with probability 1 - p."""

    p: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and 0.5 < self.p <= 1.0):
            raise NumericInputError(f"sign-correct probability must lie in (1/2, 1], got {self.p}")


@dataclass(frozen=True)
class NoiselessLinear:
    """Labels are the clean scores x^T beta*."""


@dataclass(frozen=True)
class Dataset:
    """Design matrix x (n rows) with aligned labels y."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1:
            raise InvalidDimensionError("x must be a matrix with at least one row")
        if y.shape != (x.shape[0],):
            raise InvalidDimensionError(
                f"y must have one entry per row of x: {y.shape} vs {x.shape}"
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise NumericInputError("x and y must be finite")
        object.__setattr__(self, "x", _frozen_array(x))
        object.__setattr__(self, "y", _frozen_array(y))

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]


def sample_beta(d, sigma_beta_sq, seed):
    """Ground truth with iid N(0, sigma_beta_sq) coordinates."""
    if int(d) < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {d}")
    if not (math.isfinite(sigma_beta_sq) and sigma_beta_sq > 0):
        raise NumericInputError("sigma_beta_sq must be a positive finite scalar")
    rng = np.random.default_rng(seed)
    beta = math.sqrt(sigma_beta_sq) * rng.standard_normal(int(d))
    return GroundTruth(beta_star=beta, sigma_beta_sq=float(sigma_beta_sq))


def sample_covariates(pair, which, n, seed):
    """n iid rows from N(0, Sigma_which / d) for the selected covariance."""
    side = _select_side(which)
    if int(n) < 1:
        raise InvalidDimensionError(f"sample count must be >= 1, got {n}")
    e = pair.eigvals(side)
    v = pair.eigenbasis
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((int(n), pair.d))
    return ((g @ v) * np.sqrt(e)) @ v.T / math.sqrt(pair.d)


def label(x, ground_truth, kind, seed):
    """Labels for the rows of x under the requested generator."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != ground_truth.d:
        raise InvalidDimensionError(
            f"x must be a matrix with {ground_truth.d} columns, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise NumericInputError("x must be finite")
    z = x @ ground_truth.beta_star
    rng = np.random.default_rng(seed)
    if isinstance(kind, LinearGaussian):
        return z + kind.sigma * rng.standard_normal(x.shape[0])
    if isinstance(kind, NoisySign):
        signs = np.where(z >= 0.0, 1.0, -1.0)
        keep = np.where(rng.random(x.shape[0]) < kind.p, 1.0, -1.0)
        return signs * keep
    if isinstance(kind, NoiselessLinear):
        return z
    raise NumericInputError(f"unknown label kind: {kind!r}")
