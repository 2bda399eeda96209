"""Risks of linear decision rules via the joint law of (x^T beta*, x^T beta_hat).

Under Gaussian covariates the pair of decision scores is bivariate normal, so
every metric here depends only on the 2x2 covariance (omega_star, chi, v):
squared error has a closed form, misclassification reduces to the arccos of
the score correlation, and surrogate metrics (logistic, hinge) are estimated
by chunked Monte Carlo with a deterministic per-chunk seeding scheme.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from riskshift._kernels import (
    METRIC_HINGE,
    METRIC_LOGISTIC,
    METRIC_MISCLASS,
    METRIC_SQUARED,
    metric_sums,
)
from riskshift._rng import as_seed_sequence, child_sequence
from riskshift.errors import (
    CovarianceError,
    DegenerateDecisionError,
    NumericInputError,
)
from riskshift.shiftmodel import _select_side

_PSD_SLACK = 1e-12
_CHOL_JITTER = 1e-14


class MetricKind(Enum):
    SQUARED_ERROR = METRIC_SQUARED
    MISCLASSIFICATION = METRIC_MISCLASS
    LOGISTIC = METRIC_LOGISTIC
    HINGE = METRIC_HINGE


@dataclass(frozen=True)
class DecisionCov:
    """Covariance of the decision pair: Var z*, Cov(z*, z), Var z."""

    omega_star: float
    chi: float
    v: float

    def __post_init__(self):
        if not all(math.isfinite(t) for t in (self.omega_star, self.chi, self.v)):
            raise CovarianceError("decision covariance entries must be finite")
        if self.omega_star < 0 or self.v < 0:
            raise CovarianceError("variances must be nonnegative")
        bound = self.omega_star * self.v
        if self.chi * self.chi > bound + _PSD_SLACK * max(1.0, bound):
            raise CovarianceError(
                f"chi^2 = {self.chi**2:.6g} exceeds omega_star * v = {bound:.6g}"
            )


def decision_cov(beta_star, beta_hat, pair, which):
    """DecisionCov of (x^T beta*, x^T beta_hat) under x ~ N(0, Sigma_which / d)."""
    side = _select_side(which)
    e = pair.eigvals(side)
    bs = pair.rotate(np.asarray(beta_star, dtype=np.float64))
    bh = pair.rotate(np.asarray(beta_hat, dtype=np.float64))
    if not (np.all(np.isfinite(bs)) and np.all(np.isfinite(bh))):
        raise NumericInputError("decision vectors must be finite")
    d = pair.d
    return DecisionCov(
        omega_star=float(np.sum(e * bs * bs)) / d,
        chi=float(np.sum(e * bs * bh)) / d,
        v=float(np.sum(e * bh * bh)) / d,
    )


def squared_risk(cov):
    """E (z* - z)^2 = omega_star - 2 chi + v."""
    return cov.omega_star - 2.0 * cov.chi + cov.v


def misclassification_risk(cov):
    """Pr(z* z < 0) = arccos(corr) / pi for a centered Gaussian pair."""
    bound = cov.omega_star * cov.v
    if bound <= 0.0:
        raise DegenerateDecisionError(
            "misclassification risk needs both decision scores nondegenerate"
        )
    corr = cov.chi / math.sqrt(bound)
    return math.acos(min(1.0, max(-1.0, corr))) / math.pi


def _cholesky_2x2(cov):
    """Lower factor (l11, l21, l22) of [[omega_star, chi], [chi, v]].

    A diagonal jitter of 1e-14 is applied if the exact factorization fails;
    remaining deficits within a few ulps of v are clamped to zero.
    """
    for jitter in (0.0, _CHOL_JITTER):
        w = cov.omega_star + jitter
        vv = cov.v + jitter
        if w < 0.0:
            continue
        l11 = math.sqrt(w)
        if l11 == 0.0:
            if cov.chi != 0.0:
                continue
            l21 = 0.0
        else:
            l21 = cov.chi / l11
        rem = vv - l21 * l21
        if rem < 0.0:
            if rem >= -4.0 * np.finfo(np.float64).eps * max(vv, 1.0):
                rem = 0.0
            else:
                continue
        return l11, l21, math.sqrt(rem)
    raise CovarianceError("decision covariance is not PSD even after 1e-14 jitter")


def _validate_mc_args(metric, n_draws, chunk_size):
    if not isinstance(metric, MetricKind):
        raise NumericInputError(f"metric must be a MetricKind member, got {metric!r}")
    if int(n_draws) < 100:
        raise NumericInputError(f"n_draws must be >= 100, got {n_draws}")
    if int(chunk_size) < 1:
        raise NumericInputError(f"chunk_size must be >= 1, got {chunk_size}")
    return int(n_draws), int(chunk_size)


def _finalize_mc(total, total_sq, n):
    mean = total / n
    var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
    return float(mean), float(math.sqrt(var / n))


def mc_metric_risk(cov, metric, n_draws, seed, chunk_size=2**18):
    """Monte Carlo (estimate, standard error) of a metric under a DecisionCov.

    Draws are generated in chunks of chunk_size; chunk i uses the child seed
    sequence (seed, i), and partial sums are combined in ascending chunk
    order, so results are identical for any chunk schedule.
    """
    n_draws, chunk_size = _validate_mc_args(metric, n_draws, chunk_size)
    l11, l21, l22 = _cholesky_2x2(cov)
    root = as_seed_sequence(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk_index = 0
    while done < n_draws:
        m = min(chunk_size, n_draws - done)
        rng = np.random.default_rng(child_sequence(root, chunk_index))
        g = rng.standard_normal((m, 2))
        z_star = l11 * g[:, 0]
        z = l21 * g[:, 0] + l22 * g[:, 1]
        s, s2 = metric_sums(z_star, z, metric.value)
        total += s
        total_sq += s2
        done += m
        chunk_index += 1
    return _finalize_mc(total, total_sq, n_draws)


def population_mc_risk(beta_star, beta_hat, pair, which, metric, n_draws, seed, chunk_size=4096):
    """Monte Carlo metric estimate drawing fresh covariate vectors directly.

    Independent cross-check of mc_metric_risk: instead of sampling the 2x2
    Gaussian of decision scores it samples x ~ N(0, Sigma_which / d) and
    evaluates the scores exactly.  Chunk seeding follows the same (seed, i)
    scheme; the default chunk is smaller because each draw costs O(d).
    """
    n_draws, chunk_size = _validate_mc_args(metric, n_draws, chunk_size)
    side = _select_side(which)
    e = pair.eigvals(side)
    v = pair.eigenbasis
    sqrt_d = math.sqrt(pair.d)
    beta_star = np.asarray(beta_star, dtype=np.float64)
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    u_star = v @ (np.sqrt(e) * (v.T @ beta_star)) / sqrt_d
    u_hat = v @ (np.sqrt(e) * (v.T @ beta_hat)) / sqrt_d
    if not (np.all(np.isfinite(u_star)) and np.all(np.isfinite(u_hat))):
        raise NumericInputError("decision vectors must be finite")
    root = as_seed_sequence(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk_index = 0
    while done < n_draws:
        m = min(chunk_size, n_draws - done)
        rng = np.random.default_rng(child_sequence(root, chunk_index))
        g = rng.standard_normal((m, pair.d))
        s, s2 = metric_sums(g @ u_star, g @ u_hat, metric.value)
        total += s
        total_sq += s2
        done += m
        chunk_index += 1
    return _finalize_mc(total, total_sq, n_draws)
