"""Subspace denoising and compressed sensing with ridge reconstruction.

Signals live on low-dimensional subspaces (columns of U_P at train time, U_Q
at test time) with unit-variance coefficients; measurements are y = Ax + noise.
The ridge reconstruction admits closed-form train/test risks, and the test
risk obeys an affine relation in the train risk whose coefficients depend on
the subspace overlap.  For denoising (A = I) the relation is exact; for
Gaussian measurement matrices it holds up to a residual that shrinks with n.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from riskshift.errors import (
    InvalidDimensionError,
    NumericInputError,
)
from riskshift.subspace import (
    OrthonormalBasis,
    _frozen_array,
    overlap_coefficient,
    principal_angles,
)

_SYM_TOL = 1e-10
_ALPHA_TOL = 1e-14


@dataclass(frozen=True)
class InverseProblem:
    """Signal subspaces, noise variances, and ridge weight."""

    u_p: OrthonormalBasis
    u_q: OrthonormalBasis
    sigma_p_sq: float
    sigma_q_sq: float
    lam: float

    def __post_init__(self):
        if not isinstance(self.u_p, OrthonormalBasis) or not isinstance(
            self.u_q, OrthonormalBasis
        ):
            raise InvalidDimensionError("u_p and u_q must be OrthonormalBasis instances")
        if self.u_p.ambient_dim != self.u_q.ambient_dim:
            raise InvalidDimensionError(
                f"subspaces live in different ambient dimensions: "
                f"{self.u_p.ambient_dim} vs {self.u_q.ambient_dim}"
            )
        for name, value in (
            ("sigma_p_sq", self.sigma_p_sq),
            ("sigma_q_sq", self.sigma_q_sq),
            ("lam", self.lam),
        ):
            if not (math.isfinite(value) and value >= 0):
                raise NumericInputError(f"{name} must be finite and >= 0, got {value}")

    @property
    def d(self):
        return self.u_p.ambient_dim

    @property
    def d_p(self):
        return self.u_p.rank

    @property
    def d_q(self):
        return self.u_q.rank

    def overlap(self):
        """Mean squared principal cosine a in [0, 1] between the subspaces."""
        return overlap_coefficient(
            principal_angles(self.u_p, self.u_q), self.d_q
        )


@dataclass(frozen=True)
class DenoiseOperator:
    """Scalar shrinkage alpha applied to the projection onto the train subspace."""

    alpha: float
    pi_p: OrthonormalBasis

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and 0.0 < self.alpha <= 1.0):
            raise NumericInputError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not isinstance(self.pi_p, OrthonormalBasis):
            raise InvalidDimensionError("pi_p must be an OrthonormalBasis")


def denoise_operator(problem):
    """Optimal ridge denoiser x_hat = alpha * Pi_P y with alpha = 1/(1+sigma_P^2+lam)."""
    alpha = 1.0 / (1.0 + problem.sigma_p_sq + problem.lam)
    op = DenoiseOperator(alpha=alpha, pi_p=problem.u_p)
    if abs(op.alpha - alpha) > _ALPHA_TOL:
        raise NumericInputError("alpha drifted from its defining expression")
    return op


def denoise_risks(problem):
    """Closed-form (risk_P, risk_Q, alpha) of the ridge denoiser.

    risk_P = (1-alpha)^2 + alpha^2 sigma_P^2;
    risk_Q = 1 + (alpha^2 - 2 alpha) a + alpha^2 sigma_Q^2 d_P / d_Q,
    with a the subspace overlap coefficient.
    """
    alpha = 1.0 / (1.0 + problem.sigma_p_sq + problem.lam)
    a = problem.overlap()
    risk_p = (1.0 - alpha) ** 2 + alpha * alpha * problem.sigma_p_sq
    risk_q = (
        1.0
        + (alpha * alpha - 2.0 * alpha) * a
        + alpha * alpha * problem.sigma_q_sq * problem.d_p / problem.d_q
    )
    return float(risk_p), float(risk_q), float(alpha)


def denoise_relation_residual(problem):
    """|risk_Q - a risk_P - (1-a) - alpha^2((d_P/d_Q) sigma_Q^2 - a sigma_P^2)|."""
    risk_p, risk_q, alpha = denoise_risks(problem)
    a = problem.overlap()
    predicted = (
        a * risk_p
        + (1.0 - a)
        + alpha * alpha * ((problem.d_p / problem.d_q) * problem.sigma_q_sq - a * problem.sigma_p_sq)
    )
    return float(abs(risk_q - predicted))


def gaussian_measurement(n, d, seed):
    """n x d matrix with iid N(0, 1/n) entries."""
    n, d = int(n), int(d)
    if n < 1 or d < 1:
        raise InvalidDimensionError(f"measurement shape must be positive, got ({n}, {d})")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, d)) / math.sqrt(n)


@dataclass(frozen=True)
class CSOperator:
    """Reduced reconstruction data: x_hat = U_P S U_P^T A^T y."""

    eta: float
    s: np.ndarray
    a: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise NumericInputError(f"eta must be a positive finite scalar, got {self.eta}")
        s = np.asarray(self.s, dtype=np.float64)
        a = np.asarray(self.a, dtype=np.float64)
        m = np.asarray(self.m, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise InvalidDimensionError("S must be square")
        if m.shape != s.shape:
            raise InvalidDimensionError("M must match the shape of S")
        if a.ndim != 2:
            raise InvalidDimensionError("A must be a matrix")
        if np.max(np.abs(s - s.T)) > _SYM_TOL:
            raise NumericInputError("S must be symmetric within 1e-10")
        object.__setattr__(self, "s", _frozen_array(s))
        object.__setattr__(self, "a", _frozen_array(a))
        object.__setattr__(self, "m", _frozen_array(m))


def cs_operator(a_matrix, problem):
    """Ridge reconstruction operator for measurements y = A x + noise.

    Computes M = U_P^T A^T A U_P and S = eta I - eta^2 M (I + eta M)^{-1} with
    eta = 1/(sigma_P^2 + lam), which simplifies to eta (I + eta M)^{-1}; the
    solve is a d_P x d_P SPD factorization, never an n x n inverse.
    """
    a_matrix = np.asarray(a_matrix, dtype=np.float64)
    if a_matrix.ndim != 2 or a_matrix.shape[1] != problem.d:
        raise InvalidDimensionError(
            f"A must have {problem.d} columns, got shape {a_matrix.shape}"
        )
    if not np.all(np.isfinite(a_matrix)):
        raise NumericInputError("A must be finite")
    n = a_matrix.shape[0]
    if problem.d_p > n or problem.d_q > n:
        raise InvalidDimensionError(
            f"measurement count n={n} must be >= both subspace dimensions "
            f"({problem.d_p}, {problem.d_q})"
        )
    denom = problem.sigma_p_sq + problem.lam
    if denom <= 0.0:
        raise NumericInputError("sigma_p_sq + lam must be positive for the ridge operator")
    eta = 1.0 / denom
    b_p = a_matrix @ problem.u_p.columns
    m = b_p.T @ b_p
    m = 0.5 * (m + m.T)
    i_plus = eta * m
    i_plus[np.diag_indices_from(i_plus)] += 1.0
    try:
        factor = scipy.linalg.cho_factor(i_plus)
        s = eta * scipy.linalg.cho_solve(factor, np.eye(problem.d_p))
    except scipy.linalg.LinAlgError as exc:
        raise NumericInputError(f"(I + eta M) is numerically singular: {exc}") from exc
    s = 0.5 * (s + s.T)
    return CSOperator(eta=eta, s=s, a=a_matrix, m=m)


def _check_op_matches(op, problem):
    if op.a.shape[1] != problem.d or op.s.shape[0] != problem.d_p:
        raise InvalidDimensionError("operator was not built for this problem")


def cs_risks(op, problem):
    """Exact (risk_P, risk_Q) of the ridge reconstruction at finite n.

    risk_P = (||I - S M||_F^2 + sigma_P^2 tr(S^T S M)) / d_P;
    risk_Q = (||U_P^T U_Q - S N||_F^2 - ||U_P^T U_Q||_F^2 + d_Q
              + sigma_Q^2 tr(S^T S M)) / d_Q,  N = U_P^T A^T A U_Q.
    """
    _check_op_matches(op, problem)
    s, m = op.s, op.m
    noise_core = float(np.sum((s @ s) * m))
    eye_minus = -s @ m
    eye_minus[np.diag_indices_from(eye_minus)] += 1.0
    risk_p = (float(np.sum(eye_minus * eye_minus)) + problem.sigma_p_sq * noise_core) / problem.d_p
    b_p = op.a @ problem.u_p.columns
    b_q = op.a @ problem.u_q.columns
    n_mat = b_p.T @ b_q
    g = problem.u_p.columns.T @ problem.u_q.columns
    resid = g - s @ n_mat
    risk_q = (
        float(np.sum(resid * resid))
        - float(np.sum(g * g))
        + problem.d_q
        + problem.sigma_q_sq * noise_core
    ) / problem.d_q
    return float(risk_p), float(risk_q)


def cs_relation_residual(op, problem):
    """Absolute residual of the affine train/test risk relation at finite n."""
    risk_p, risk_q = cs_risks(op, problem)
    a = problem.overlap()
    alpha = 1.0 / (1.0 + problem.sigma_p_sq + problem.lam)
    predicted = (
        a * risk_p
        + (1.0 - a)
        + alpha * alpha * ((problem.d_p / problem.d_q) * problem.sigma_q_sq - a * problem.sigma_p_sq)
    )
    return float(abs(risk_q - predicted))


def inner_product_preservation_stats(a_matrix, vectors):
    """Max |<Au, Av> - <u, v>| over all pairs from a collection of unit vectors."""
    a_matrix = np.asarray(a_matrix, dtype=np.float64)
    if a_matrix.ndim != 2:
        raise InvalidDimensionError("A must be a matrix")
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        u = np.array(vectors, dtype=np.float64)
    else:
        u = np.column_stack([np.asarray(v, dtype=np.float64) for v in vectors])
    if u.shape[0] != a_matrix.shape[1]:
        raise InvalidDimensionError(
            f"vectors have length {u.shape[0]} but A has {a_matrix.shape[1]} columns"
        )
    norms = np.linalg.norm(u, axis=0)
    if np.max(np.abs(norms - 1.0)) > 1e-8:
        raise NumericInputError("all vectors must be unit norm")
    au = a_matrix @ u
    gram_before = u.T @ u
    gram_after = au.T @ au
    return float(np.max(np.abs(gram_after - gram_before)))
