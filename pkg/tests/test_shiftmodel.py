"""Tests for covariance pairs, plug-in shift parameters, and the task-dependent model."""

import numpy as np
import numpy.testing as npt
import pytest

from riskshift.errors import (
    DegenerateShiftError,
    InvalidDimensionError,
    NumericInputError,
    UnreachableRatioError,
)
from riskshift.shiftmodel import (
    CovariancePair,
    ShiftParameters,
    shift_parameters,
    subspace_shift_model,
    task_dependent_model,
)
from riskshift.subspace import SubspacePairSpec, haar_basis


def _random_beta(d, sigma_beta_sq, seed):
    rng = np.random.default_rng(seed)
    return np.sqrt(sigma_beta_sq) * rng.standard_normal(d)


def _block_equal_energy_beta(pair, sigma_beta_sq, seed):
    """Beta with each (support, Q-weight) block carrying exactly its mean energy."""
    rng = np.random.default_rng(seed)
    b = np.sqrt(sigma_beta_sq) * rng.standard_normal(pair.d)
    s, q = pair.eigvals_p, pair.eigvals_q
    for mask in ((s == 1) & (q > 0), (s == 1) & (q == 0), (s == 0) & (q > 0), (s == 0) & (q == 0)):
        k = int(np.sum(mask))
        if k and np.sum(b[mask] ** 2) > 0:
            b[mask] *= np.sqrt(k * sigma_beta_sq / np.sum(b[mask] ** 2))
    return pair.eigenbasis @ b


def test_covariance_pair_validation():
    v = haar_basis(6, 6, 0).columns
    p = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    q = np.array([2.0, 2.0, 0.0, 0.0, 1.0, 0.0])
    pair = CovariancePair(eigenbasis=v, eigvals_p=p, eigvals_q=q)
    assert pair.d == 6 and pair.d_p == 3

    with pytest.raises(NumericInputError):
        CovariancePair(eigenbasis=v, eigvals_p=p * 0.5, eigvals_q=q)  # non-binary
    with pytest.raises(NumericInputError):
        CovariancePair(eigenbasis=v, eigvals_p=p, eigvals_q=q - 0.5)  # negative
    with pytest.raises(InvalidDimensionError):
        CovariancePair(eigenbasis=v[:, :5], eigvals_p=p, eigvals_q=q)
    with pytest.raises(InvalidDimensionError):
        CovariancePair(eigenbasis=2 * v, eigvals_p=p, eigvals_q=q)


def test_sigma_dense_and_quad_form_agree():
    pair = subspace_shift_model(SubspacePairSpec(12, 8, 6, 4), 1.5, 9)
    x = np.random.default_rng(1).standard_normal(12)
    for which in ("P", "Q"):
        dense = pair.sigma_dense(which)
        npt.assert_allclose(pair.quad_form(which, x), x @ dense @ x, rtol=1e-12)
    npt.assert_allclose(
        pair.sigma_dense("P"), pair.sigma_dense("P").T, atol=1e-12
    )


def test_subspace_model_eigenvalue_structure():
    pair = subspace_shift_model(SubspacePairSpec(20, 12, 10, 6), 2.5, 3)
    assert int(np.sum(pair.eigvals_p == 1.0)) == 12
    assert int(np.sum(pair.eigvals_q > 0)) == 10
    nonzero = pair.eigvals_q[pair.eigvals_q > 0]
    npt.assert_array_equal(nonzero, np.full(10, 2.5))
    # the overlap block carries Q-weight on exactly d_pq support coordinates
    both = (pair.eigvals_p == 1.0) & (pair.eigvals_q > 0)
    assert int(np.sum(both)) == 6


def test_shift_parameters_identity_shift():
    # Sigma_Q equal to the train projector: mu and kappa exact, gamma concentrates
    spec = SubspacePairSpec(400, 300, 300, 300)
    pair = subspace_shift_model(spec, 1.0, 5)
    beta = _random_beta(400, 1.0, 6)
    shift = shift_parameters(pair, beta, 1.0)
    assert shift.mu == pytest.approx(1.0, abs=1e-12)
    assert shift.kappa == pytest.approx(1.0, abs=1e-12)
    assert abs(shift.gamma - 1.0) < 5 / np.sqrt(300)
    assert shift.r_p == pytest.approx(0.75)


def test_shift_parameters_figure_geometry():
    # tau=2 with (d, d_p, d_q, d_pq) = (800, 720, 640, 560): kappa = 14/9 exactly
    spec = SubspacePairSpec(800, 720, 640, 560)
    pair = subspace_shift_model(spec, 2.0, 11)
    beta = _random_beta(800, 1.0, 12)
    shift = shift_parameters(pair, beta, 1.0)
    assert shift.kappa == pytest.approx(14 / 9, rel=1e-12)
    assert abs(shift.gamma - 14 / 9) < 0.2
    assert abs(shift.mu - 8 / 7) < 0.05
    assert shift.mu >= 1.0


def test_shift_parameters_exact_for_block_equal_beta():
    spec = SubspacePairSpec(800, 720, 640, 560)
    pair = subspace_shift_model(spec, 2.0, 21)
    beta = _block_equal_energy_beta(pair, 1.0, 22)
    shift = shift_parameters(pair, beta, 1.0)
    assert shift.gamma == pytest.approx(14 / 9, rel=1e-12)
    assert shift.mu == pytest.approx(8 / 7, rel=1e-12)


def test_shift_parameters_requires_support_energy():
    pair = subspace_shift_model(SubspacePairSpec(10, 4, 3, 2), 1.0, 7)
    # beta orthogonal to the support: zero support energy
    beta = pair.eigenbasis @ np.concatenate([np.zeros(4), np.ones(6)])
    with pytest.raises(DegenerateShiftError):
        shift_parameters(pair, beta, 1.0)


def test_shift_parameters_invariants_enforced():
    with pytest.raises(NumericInputError):
        ShiftParameters(gamma=0.0, mu=1.0, kappa=1.0, r_p=0.5, sigma_beta_sq=1.0)
    with pytest.raises(NumericInputError):
        ShiftParameters(gamma=1.0, mu=0.9, kappa=1.0, r_p=0.5, sigma_beta_sq=1.0)
    with pytest.raises(NumericInputError):
        ShiftParameters(gamma=1.0, mu=1.0, kappa=1.0, r_p=1.5, sigma_beta_sq=1.0)


def test_task_dependent_ratio_one_is_task_independent():
    pair = subspace_shift_model(SubspacePairSpec(200, 160, 120, 100), 2.0, 31)
    beta = _block_equal_energy_beta(pair, 1.0, 32)
    base = shift_parameters(pair, beta, 1.0)
    built = task_dependent_model(pair, beta, target_ratio=1.0, target_gamma=base.gamma)
    on_support = built.eigvals_q[built.eigvals_p == 1.0]
    npt.assert_allclose(on_support, on_support[0], rtol=1e-9)
    shift = shift_parameters(built, beta, 1.0)
    assert shift.kappa == pytest.approx(shift.gamma, rel=1e-9)


def test_task_dependent_hits_ratio_and_gamma():
    pair = subspace_shift_model(SubspacePairSpec(300, 240, 200, 160), 2.0, 41)
    beta = _random_beta(300, 1.0, 42)
    base = shift_parameters(pair, beta, 1.0)
    for ratio in (0.3, 2.0, 5.0):
        built = task_dependent_model(pair, beta, target_ratio=ratio, target_gamma=base.gamma)
        shift = shift_parameters(built, beta, 1.0)
        assert shift.kappa / shift.gamma == pytest.approx(ratio, rel=5e-3)
        assert shift.gamma == pytest.approx(base.gamma, rel=1e-6)
        # same train-side law
        npt.assert_array_equal(built.eigvals_p, pair.eigvals_p)
        # Q-weights confined to the support
        assert np.all(built.eigvals_q[built.eigvals_p == 0.0] == 0.0)


def test_task_dependent_unreachable_ratio():
    pair = subspace_shift_model(SubspacePairSpec(60, 40, 30, 20), 2.0, 51)
    beta = _random_beta(60, 1.0, 52)
    with pytest.raises(UnreachableRatioError):
        task_dependent_model(pair, beta, target_ratio=1e9, target_gamma=1.0)


def test_rotate_roundtrip():
    pair = subspace_shift_model(SubspacePairSpec(15, 9, 7, 5), 1.2, 61)
    x = np.random.default_rng(2).standard_normal(15)
    npt.assert_allclose(pair.eigenbasis @ pair.rotate(x), x, atol=1e-12)
