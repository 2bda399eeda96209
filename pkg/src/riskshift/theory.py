"""Closed-form risk relations between train and shifted test distributions.

For ridge-type estimators on simultaneously diagonalizable covariance pairs,
the test risk is a deterministic function of the train risk.  This module
provides the regression relation (affine when gamma = kappa), the
classification relation (affine in sec^2 of pi times the risk), the
asymptotic 2x2 decision covariances of a three-parameter estimator family,
per-eigenvalue resolvent functionals with ratio-based monotonicity checks,
finite-dimensional linearity diagnostics, and the probit/arctan gap bound.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from riskshift.errors import (
    DegenerateShiftError,
    InvalidDimensionError,
    NumericInputError,
    RelationInapplicableError,
    RiskDomainError,
)
from riskshift.risk import DecisionCov
from riskshift.shiftmodel import ShiftParameters

_GAMMA_KAPPA_REL_TOL = 1e-6


@dataclass(frozen=True)
class AsymParams:
    """Alignment a, resolvent shift b, and noise-energy c of the estimator family.

    The family covers ridge-type estimators whose rotated coefficients are
    (a * beta_j + noise) / (1 + b) per eigendirection, with c the variance of
    the noise energy per direction.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not all(math.isfinite(t) for t in (self.a, self.b, self.c)):
            raise NumericInputError("asymptotic parameters must be finite")
        if self.b <= 0 or self.c <= 0:
            raise NumericInputError("b and c must be positive")


@dataclass(frozen=True)
class FunctionalTuple:
    """Resolvent functionals of a covariance pair at shift b, per distribution."""

    omega_p: float
    gamma_p: float
    lambda_p: float
    theta_p: float
    omega_q: float
    gamma_q: float
    lambda_q: float
    theta_q: float


@dataclass(frozen=True)
class MonotonicityVerdict:
    """Whether test-risk functionals are a fixed affine image of train ones."""

    holds: bool
    rho: float
    u0: float
    max_deviation: float


def asymptotic_decision_cov(params, shift):
    """Decision covariances (train, test) of the (a, b, c) estimator family."""
    if not isinstance(params, AsymParams):
        raise NumericInputError("params must be an AsymParams")
    if not isinstance(shift, ShiftParameters):
        raise NumericInputError("shift must be a ShiftParameters")
    a, b, c = params.a, params.b, params.c
    base = shift.r_p * shift.sigma_beta_sq
    scale = 1.0 + b
    cov_p = DecisionCov(
        omega_star=base,
        chi=a * base / scale,
        v=(a * a * base + c * shift.r_p) / (scale * scale),
    )
    cov_q = DecisionCov(
        omega_star=shift.gamma * shift.mu * base,
        chi=a * shift.gamma * base / scale,
        v=(a * a * shift.gamma * base + c * shift.kappa * shift.r_p) / (scale * scale),
    )
    return cov_p, cov_q


def regression_relation(risk_p, shift):
    """Affine map of squared risks, valid when gamma = kappa.

    risk_q = gamma * risk_p + gamma * r_p * sigma_beta_sq * (mu - 1).
    """
    if not (math.isfinite(risk_p) and risk_p >= 0):
        raise RiskDomainError(f"squared risk must be finite and >= 0, got {risk_p}")
    rel_gap = abs(shift.gamma - shift.kappa) / shift.gamma
    if rel_gap > _GAMMA_KAPPA_REL_TOL:
        raise RelationInapplicableError(
            f"regression relation needs gamma = kappa; relative gap is {rel_gap:.3g}"
        )
    return shift.gamma * risk_p + shift.gamma * shift.r_p * shift.sigma_beta_sq * (shift.mu - 1.0)


def _sec_sq(risk):
    c = math.cos(math.pi * risk)
    return 1.0 / (c * c)


def _risk_from_sec_sq(s):
    if s < 1.0:
        if s < 1.0 - 1e-9:
            raise RiskDomainError(f"sec^2 value {s} below 1; no risk in [0, 1/2) maps to it")
        s = 1.0
    return math.acos(min(1.0, 1.0 / math.sqrt(s))) / math.pi


def classification_relation(risk_p, shift):
    """Test misclassification risk from the train one.

    sec^2(pi * risk_q) = (kappa * mu / gamma) * (sec^2(pi * risk_p) - 1) + mu.
    """
    if not (math.isfinite(risk_p) and 0.0 < risk_p < 0.5):
        raise RiskDomainError(f"misclassification risk must lie in (0, 1/2), got {risk_p}")
    s_q = (shift.kappa * shift.mu / shift.gamma) * (_sec_sq(risk_p) - 1.0) + shift.mu
    return _risk_from_sec_sq(s_q)


def classification_relation_inverse(risk_q, shift):
    """Train risk whose image under classification_relation is risk_q."""
    if not (math.isfinite(risk_q) and 0.0 < risk_q < 0.5):
        raise RiskDomainError(f"misclassification risk must lie in (0, 1/2), got {risk_q}")
    slope = shift.kappa * shift.mu / shift.gamma
    s_p = (_sec_sq(risk_q) - shift.mu) / slope + 1.0
    return _risk_from_sec_sq(s_p)


def covariance_functionals(pair, beta_star, b):
    """Resolvent functionals of (Sigma_P, Sigma_Q) at shift b > 0.

    With s, q the shared-basis eigenvalues and b_j the rotated coordinates of
    beta*, each functional averages s^k q^l b_j^2 / (s + b)^m over j.
    """
    if not (math.isfinite(b) and b > 0):
        raise NumericInputError(f"resolvent shift b must be positive, got {b}")
    bb = pair.rotate(np.asarray(beta_star, dtype=np.float64))
    if not np.all(np.isfinite(bb)):
        raise NumericInputError("beta_star must be finite")
    s = pair.eigvals_p
    q = pair.eigvals_q
    d = pair.d
    b_sq = bb * bb
    res = s + b
    res_sq = res * res
    return FunctionalTuple(
        omega_p=float(np.sum(s * b_sq)) / d,
        gamma_p=float(np.sum(s * s * b_sq / res)) / d,
        lambda_p=float(np.sum(s * s * s * b_sq / res_sq)) / d,
        theta_p=float(np.sum(s * s / res_sq)) / d,
        omega_q=float(np.sum(q * b_sq)) / d,
        gamma_q=float(np.sum(q * s * b_sq / res)) / d,
        lambda_q=float(np.sum(q * s * s * b_sq / res_sq)) / d,
        theta_q=float(np.sum(q * s / res_sq)) / d,
    )


def _b_grid_or_default(b_grid):
    if b_grid is None:
        return np.geomspace(1e-3, 1e3, 16)
    grid = np.asarray(b_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise NumericInputError("b_grid must be a nonempty 1-d array")
    if not np.all(np.isfinite(grid)) or np.min(grid) <= 0:
        raise NumericInputError("b_grid entries must be positive and finite")
    return grid


def monotonicity_check_regression(pair, beta_star, b_grid=None, rel_tol=1e-8):
    """Do Gamma/Lambda/Theta under Q equal a single multiple rho of those under P?

    The squared-risk relation holds with slope rho exactly when the three
    resolvent ratios agree for every shift in the grid.
    """
    if not (math.isfinite(rel_tol) and rel_tol > 0):
        raise NumericInputError("rel_tol must be positive")
    grid = _b_grid_or_default(b_grid)
    rho = None
    max_dev = 0.0
    for b in grid:
        f = covariance_functionals(pair, beta_star, float(b))
        if f.gamma_p <= 0.0:
            raise DegenerateShiftError(
                "beta* carries no energy on the Sigma_P support; ratios are undefined"
            )
        if rho is None:
            rho = f.gamma_q / f.gamma_p
            if rho <= 0.0:
                return MonotonicityVerdict(
                    holds=False, rho=rho, u0=0.0, max_deviation=math.inf
                )
        for num, den in (
            (f.gamma_q, f.gamma_p),
            (f.lambda_q, f.lambda_p),
            (f.theta_q, f.theta_p),
        ):
            dev = abs(num - rho * den) / abs(rho * den)
            max_dev = max(max_dev, dev)
    return MonotonicityVerdict(
        holds=bool(max_dev <= rel_tol), rho=float(rho), u0=0.0, max_deviation=float(max_dev)
    )


def monotonicity_check_classification(pair, beta_star, b_grid=None, rel_tol=1e-8):
    """Are the two scale-free composites affinely locked across distributions?

    The composites Omega*Theta/Gamma^2 and Omega*Lambda/Gamma^2 drive the
    misclassification relation; it holds iff the Q-composites equal
    rho * (P-composite) and rho * (P-composite) + u0 for all shifts b.
    """
    if not (math.isfinite(rel_tol) and rel_tol > 0):
        raise NumericInputError("rel_tol must be positive")
    grid = _b_grid_or_default(b_grid)
    rho = None
    u0 = None
    max_dev = 0.0
    for b in grid:
        f = covariance_functionals(pair, beta_star, float(b))
        if f.gamma_p <= 0.0 or f.gamma_q <= 0.0:
            raise DegenerateShiftError(
                "beta* carries no energy on the Sigma_P support; composites are undefined"
            )
        ct_p = f.omega_p * f.theta_p / (f.gamma_p * f.gamma_p)
        ct_q = f.omega_q * f.theta_q / (f.gamma_q * f.gamma_q)
        cl_p = f.omega_p * f.lambda_p / (f.gamma_p * f.gamma_p)
        cl_q = f.omega_q * f.lambda_q / (f.gamma_q * f.gamma_q)
        if rho is None:
            rho = ct_q / ct_p
            u0 = cl_q - rho * cl_p
            if rho <= 0.0:
                return MonotonicityVerdict(
                    holds=False, rho=rho, u0=u0, max_deviation=math.inf
                )
        max_dev = max(max_dev, abs(ct_q - rho * ct_p) / abs(rho * ct_p))
        max_dev = max(max_dev, abs(cl_q - rho * cl_p - u0) / max(abs(cl_q), 1e-300))
    return MonotonicityVerdict(
        holds=bool(max_dev <= rel_tol), rho=float(rho), u0=float(u0), max_deviation=float(max_dev)
    )


def finite_dim_linearity(beta_star, basis, sigma_q, sigma_p_sq, sigma_q_sq):
    """Slope and intercept of test risk as an affine function of train risk.

    For population ridge with train covariance the projector onto `basis`,
    both risks are affine in the shrinkage factor, so the test risk is affine
    in the train risk with slope beta_P*^T Sigma_Q beta_P* / ||beta_P*||^2.
    Returns (cross, slope, intercept, expected_slope, expected_intercept)
    where cross = beta_P*^T Sigma_Q (beta* - beta_P*) measures the coupling
    that breaks exactness, and the expected values replace the beta*-dependent
    quadratic forms by their isotropic averages.
    """
    beta_star = np.asarray(beta_star, dtype=np.float64)
    sigma_q = np.asarray(sigma_q, dtype=np.float64)
    d = basis.ambient_dim
    if beta_star.shape != (d,):
        raise InvalidDimensionError(f"beta_star must have shape ({d},)")
    if sigma_q.shape != (d, d):
        raise InvalidDimensionError(f"sigma_q must have shape ({d}, {d})")
    if not (np.all(np.isfinite(beta_star)) and np.all(np.isfinite(sigma_q))):
        raise NumericInputError("inputs must be finite")
    if not (math.isfinite(sigma_p_sq) and sigma_p_sq >= 0):
        raise NumericInputError("sigma_p_sq must be finite and >= 0")
    if not (math.isfinite(sigma_q_sq) and sigma_q_sq >= 0):
        raise NumericInputError("sigma_q_sq must be finite and >= 0")
    b_p = basis.project(beta_star)
    b_perp = beta_star - b_p
    denom = float(b_p @ b_p)
    # projection roundoff leaves O(eps^2) energy even for orthogonal inputs
    if denom <= 1e-20 * max(float(beta_star @ beta_star), 1e-300):
        raise DegenerateShiftError("beta* has no energy in the projector range")
    sq_bp = sigma_q @ b_p
    slope = float(b_p @ sq_bp) / denom
    cross = float(sq_bp @ b_perp)
    total = float(beta_star @ (sigma_q @ beta_star))
    intercept = total - slope * denom + sigma_q_sq - slope * sigma_p_sq
    u = basis.columns
    k = u.shape[1]
    expected_slope = float(np.sum((sigma_q @ u) * u)) / k
    expected_intercept = (
        float(np.trace(sigma_q)) - expected_slope * k + sigma_q_sq - expected_slope * sigma_p_sq
    )
    return cross, slope, intercept, expected_slope, expected_intercept


def population_ridge_risks(beta_star, basis, sigma_q, sigma_p_sq, sigma_q_sq, lam):
    """Train and test predictive risks of the population ridge estimator.

    The estimator is alpha * beta_P* with alpha = 1 / (1 + lam); train risk is
    under the projector covariance with noise sigma_p_sq, test risk under
    sigma_q with noise sigma_q_sq.  Both include the label-noise floor.
    """
    if not (math.isfinite(lam) and lam >= 0):
        raise NumericInputError("lam must be finite and >= 0")
    beta_star = np.asarray(beta_star, dtype=np.float64)
    sigma_q = np.asarray(sigma_q, dtype=np.float64)
    d = basis.ambient_dim
    if beta_star.shape != (d,) or sigma_q.shape != (d, d):
        raise InvalidDimensionError("beta_star / sigma_q dimensions must match the basis")
    alpha = 1.0 / (1.0 + lam)
    b_p = basis.project(beta_star)
    b_perp = beta_star - b_p
    shrink = 1.0 - alpha
    risk_p = shrink * shrink * float(b_p @ b_p) + sigma_p_sq
    err = b_perp + shrink * b_p
    risk_q = float(err @ (sigma_q @ err)) + sigma_q_sq
    return float(risk_p), float(risk_q)


def probit_arctan_gap(u_grid):
    """Max pointwise gap between the Gaussian tail probit curve and arctan(e^u)/pi.

    The grid must cover [-10, 10] with spacing at most 0.01 so the reported
    maximum is a certified bound for the continuous gap up to curvature error.
    """
    u = np.asarray(u_grid, dtype=np.float64)
    if u.ndim != 1 or u.size < 2:
        raise NumericInputError("u_grid must be a 1-d array with at least two points")
    if not np.all(np.isfinite(u)):
        raise NumericInputError("u_grid must be finite")
    u = np.sort(u)
    if u[0] > -10.0 or u[-1] < 10.0:
        raise NumericInputError("u_grid must cover [-10, 10]")
    if np.max(np.diff(u)) > 0.01 + 1e-12:
        raise NumericInputError("u_grid spacing must be at most 0.01")
    probit = 0.5 * ndtr(u / math.sqrt(2.0))
    arct = np.arctan(np.exp(np.minimum(u, 700.0))) / math.pi
    return float(np.max(np.abs(probit - arct)))
