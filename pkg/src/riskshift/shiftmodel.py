"""Simultaneously diagonalizable covariance pairs and scalar shift descriptors.

A CovariancePair stores one shared eigenbasis V plus two eigenvalue vectors:
Sigma_P = V diag(eigvals_p) V^T is a projector (binary eigenvalues) and
Sigma_Q = V diag(eigvals_q) V^T is PSD.  All formulas in this package reduce to
diagonal arithmetic after rotating vectors into that basis, so covariances are
never materialized densely except on explicit request.
"""

import math
from dataclasses import dataclass

import numpy as np

from riskshift.errors import (
    DegenerateShiftError,
    InvalidDimensionError,
    NumericInputError,
    UnreachableRatioError,
)
from riskshift.subspace import SubspacePairSpec, _frozen_array, haar_basis

_ORTHO_TOL = 1e-10
_RATIO_TOL = 1e-3
_GAMMA_TOL = 1e-6


def _select_side(which):
    side = str(which).upper()
    if side not in ("P", "Q"):
        raise NumericInputError(f"distribution selector must be 'P' or 'Q', got {which!r}")
    return side


@dataclass(frozen=True)
class CovariancePair:
    """Shared eigenbasis plus eigenvalues of (Sigma_P, Sigma_Q)."""

    eigenbasis: np.ndarray
    eigvals_p: np.ndarray
    eigvals_q: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.eigenbasis, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InvalidDimensionError("eigenbasis must be a square matrix")
        d = v.shape[0]
        if np.max(np.abs(v.T @ v - np.eye(d))) > _ORTHO_TOL:
            raise InvalidDimensionError("eigenbasis is not orthonormal within 1e-10")
        e_p = np.asarray(self.eigvals_p, dtype=np.float64)
        e_q = np.asarray(self.eigvals_q, dtype=np.float64)
        if e_p.shape != (d,) or e_q.shape != (d,):
            raise InvalidDimensionError("eigenvalue vectors must have length d")
        if not np.all((e_p == 0.0) | (e_p == 1.0)):
            raise NumericInputError("eigvals_p must be binary (projector spectrum)")
        if np.min(e_q) < -1e-12:
            raise NumericInputError("eigvals_q must be nonnegative")
        object.__setattr__(self, "eigenbasis", _frozen_array(v))
        object.__setattr__(self, "eigvals_p", _frozen_array(e_p))
        object.__setattr__(self, "eigvals_q", _frozen_array(np.maximum(e_q, 0.0)))

    @property
    def d(self):
        return self.eigenbasis.shape[0]

    @property
    def d_p(self):
        return int(round(float(np.sum(self.eigvals_p))))

    def eigvals(self, which):
        return self.eigvals_p if _select_side(which) == "P" else self.eigvals_q

    def rotate(self, vec):
        """Coordinates of a length-d vector in the shared eigenbasis."""
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.d,):
            raise InvalidDimensionError(f"expected vector of length {self.d}, got {vec.shape}")
        return self.eigenbasis.T @ vec

    def quad_form(self, which, x, y=None):
        """x^T Sigma y (y defaults to x) for the selected covariance."""
        e = self.eigvals(which)
        xr = self.rotate(x)
        yr = xr if y is None else self.rotate(y)
        return float(np.sum(e * xr * yr))

    def sigma_dense(self, which):
        """Dense d x d covariance; for tests and finite-dimensional checks only."""
        e = self.eigvals(which)
        return (self.eigenbasis * e) @ self.eigenbasis.T


@dataclass(frozen=True)
class ShiftParameters:
    """Scalar shift descriptors: slope gamma, task factor mu, trace factor kappa."""

    gamma: float
    mu: float
    kappa: float
    r_p: float
    sigma_beta_sq: float

    def __post_init__(self):
        if not all(
            math.isfinite(v)
            for v in (self.gamma, self.mu, self.kappa, self.r_p, self.sigma_beta_sq)
        ):
            raise NumericInputError("shift parameters must be finite")
        if self.gamma <= 0 or self.kappa <= 0:
            raise NumericInputError("gamma and kappa must be positive")
        if self.mu < 1.0 - 1e-9:
            raise NumericInputError(f"mu must be >= 1, got {self.mu}")
        if not 0.0 < self.r_p <= 1.0:
            raise NumericInputError(f"r_p must lie in (0, 1], got {self.r_p}")
        if self.sigma_beta_sq <= 0:
            raise NumericInputError("sigma_beta_sq must be positive")


def subspace_shift_model(spec, tau, seed):
    """Projector Sigma_P plus Sigma_Q = tau * (projector onto an overlapping subspace).

    eigvals_p is 1 on the first d_p shared-basis coordinates; eigvals_q is tau
    on d_q coordinates of which exactly d_pq fall inside the P support.  The
    shared eigenbasis is Haar-random.
    """
    if not isinstance(spec, SubspacePairSpec):
        raise InvalidDimensionError("spec must be a SubspacePairSpec")
    if not (math.isfinite(tau) and tau > 0):
        raise NumericInputError(f"tau must be a positive finite scalar, got {tau}")
    v = haar_basis(spec.d, spec.d, seed).columns
    e_p = np.zeros(spec.d)
    e_p[: spec.d_p] = 1.0
    e_q = np.zeros(spec.d)
    e_q[: spec.d_pq] = tau
    e_q[spec.d_p : spec.d_p + spec.d_q - spec.d_pq] = tau
    return CovariancePair(v, e_p, e_q)


def shift_parameters(pair, beta_star, sigma_beta_sq):
    """Finite-dimensional plug-in values of the scalar shift descriptors.

    gamma = beta_P*^T Sigma_Q beta_P* / (d_p sigma_beta^2),
    mu    = beta*^T Sigma_Q beta* / beta_P*^T Sigma_Q beta_P*,
    kappa = tr(Sigma_Q Pi_P) / d_p,  r_p = d_p / d,
    with beta_P* the projection of beta* onto the Sigma_P support.
    """
    beta_star = np.asarray(beta_star, dtype=np.float64)
    if not np.all(np.isfinite(beta_star)):
        raise NumericInputError("beta_star must be finite")
    if not (math.isfinite(sigma_beta_sq) and sigma_beta_sq > 0):
        raise NumericInputError("sigma_beta_sq must be a positive finite scalar")
    b = pair.rotate(beta_star)
    s = pair.eigvals_p
    q = pair.eigvals_q
    d_p = pair.d_p
    if d_p == 0:
        raise DegenerateShiftError("Sigma_P support is empty")
    b_sq = b * b
    support_energy = float(np.sum(q * s * b_sq))
    total_energy = float(np.sum(q * b_sq))
    # relative gate: rotation roundoff leaves O(eps^2) energy on coordinates
    # that are exactly zero in exact arithmetic
    if support_energy <= 1e-20 * max(total_energy, 1e-300):
        raise DegenerateShiftError("beta* carries no Sigma_Q energy on the Sigma_P support")
    gamma = support_energy / (d_p * sigma_beta_sq)
    mu = total_energy / support_energy
    kappa = float(np.sum(q * s)) / d_p
    return ShiftParameters(
        gamma=gamma,
        mu=mu,
        kappa=kappa,
        r_p=d_p / pair.d,
        sigma_beta_sq=float(sigma_beta_sq),
    )


def _ratio_of_exponent(log_v, b_sq_sup, sigma_beta_sq, s):
    # kappa/gamma of the power family q_j = v_j^s restricted to the support
    w = np.exp(s * log_v)
    return sigma_beta_sq * float(np.sum(w)) / float(np.sum(w * b_sq_sup))


def task_dependent_model(pair, beta_star, target_ratio, target_gamma, sigma_beta_sq=1.0):
    """New Sigma_Q on the Sigma_P support whose eigenvalues track beta*'s energy.

    In the shared eigenbasis, support eigenvalues follow the one-parameter
    power family q_j = (b_j^2 + eps0)^s with eps0 = 1e-8 * sigma_beta_sq.  The
    realized kappa/gamma is strictly decreasing in s (s < 0 makes the shift
    harder, kappa > gamma), so bisection on s in [-8, 8] hits target_ratio; a
    final global scale sets gamma to target_gamma without moving the ratio.
    """
    if not (math.isfinite(target_ratio) and target_ratio > 0):
        raise NumericInputError("target_ratio must be a positive finite scalar")
    if not (math.isfinite(target_gamma) and target_gamma > 0):
        raise NumericInputError("target_gamma must be a positive finite scalar")
    if not (math.isfinite(sigma_beta_sq) and sigma_beta_sq > 0):
        raise NumericInputError("sigma_beta_sq must be a positive finite scalar")
    beta_star = np.asarray(beta_star, dtype=np.float64)
    b = pair.rotate(beta_star)
    sup = pair.eigvals_p == 1.0
    d_p = pair.d_p
    if d_p == 0:
        raise DegenerateShiftError("Sigma_P support is empty")
    b_sq_sup = b[sup] ** 2
    if float(np.sum(b_sq_sup)) <= 0.0:
        raise DegenerateShiftError("beta* vanishes on the Sigma_P support")

    eps0 = 1e-8 * sigma_beta_sq
    log_v = np.log(b_sq_sup + eps0)
    lo, hi = -8.0, 8.0
    # ratio is decreasing in s, so the reachable band is [ratio(hi), ratio(lo)]
    ratio_lo = _ratio_of_exponent(log_v, b_sq_sup, sigma_beta_sq, lo)
    ratio_hi = _ratio_of_exponent(log_v, b_sq_sup, sigma_beta_sq, hi)
    if not ratio_hi <= target_ratio <= ratio_lo:
        raise UnreachableRatioError(
            f"target kappa/gamma {target_ratio} outside reachable band "
            f"[{ratio_hi:.6g}, {ratio_lo:.6g}] of the power family"
        )
    s_mid = 0.0
    for _ in range(200):
        s_mid = 0.5 * (lo + hi)
        ratio_mid = _ratio_of_exponent(log_v, b_sq_sup, sigma_beta_sq, s_mid)
        if abs(ratio_mid - target_ratio) <= 1e-10 * target_ratio:
            break
        if ratio_mid > target_ratio:
            lo = s_mid
        else:
            hi = s_mid
    q_sup = np.exp(s_mid * log_v)
    gamma_raw = float(np.sum(q_sup * b_sq_sup)) / (d_p * sigma_beta_sq)
    q_sup *= target_gamma / gamma_raw

    e_q = np.zeros(pair.d)
    e_q[sup] = q_sup
    out = CovariancePair(pair.eigenbasis, pair.eigvals_p, e_q)
    realized = shift_parameters(out, beta_star, sigma_beta_sq)
    ratio_err = abs(realized.kappa / realized.gamma - target_ratio) / target_ratio
    gamma_err = abs(realized.gamma - target_gamma) / target_gamma
    if ratio_err > _RATIO_TOL or gamma_err > _GAMMA_TOL:
        raise UnreachableRatioError(
            f"construction missed targets: kappa/gamma off by {ratio_err:.3g} rel, "
            f"gamma off by {gamma_err:.3g} rel"
        )
    return out
