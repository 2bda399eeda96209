"""Tests for orthonormal bases, overlapping pairs, and principal angles."""

import numpy as np
import numpy.testing as npt
import pytest

from riskshift.errors import InvalidDimensionError
from riskshift.subspace import (
    OrthonormalBasis,
    SubspacePairSpec,
    haar_basis,
    overlap_coefficient,
    overlapping_pair,
    principal_angles,
    subspace_similarity,
)


def test_haar_basis_is_orthonormal():
    rng = np.random.default_rng(1210)
    for _ in range(20):
        d = int(rng.integers(2, 40))
        k = int(rng.integers(1, d + 1))
        basis = haar_basis(d, k, rng)
        npt.assert_allclose(basis.columns.T @ basis.columns, np.eye(k), atol=1e-12)


def test_haar_basis_deterministic_per_seed():
    a = haar_basis(12, 5, 314)
    b = haar_basis(12, 5, 314)
    npt.assert_array_equal(a.columns, b.columns)
    c = haar_basis(12, 5, 315)
    assert np.max(np.abs(a.columns - c.columns)) > 1e-6


def test_haar_basis_rejects_bad_dims():
    with pytest.raises(InvalidDimensionError):
        haar_basis(3, 4, 0)
    with pytest.raises(InvalidDimensionError):
        haar_basis(0, 0, 0)


def test_orthonormal_basis_validates_columns():
    good = np.eye(4)[:, :2]
    OrthonormalBasis(good)
    with pytest.raises(InvalidDimensionError):
        OrthonormalBasis(2.0 * good)
    with pytest.raises(InvalidDimensionError):
        OrthonormalBasis(np.ones((2, 3)))


def test_projector_and_project_agree():
    basis = haar_basis(9, 4, 11)
    x = np.random.default_rng(1).standard_normal(9)
    npt.assert_allclose(basis.projector() @ x, basis.project(x), atol=1e-12)
    npt.assert_allclose(basis.project(basis.project(x)), basis.project(x), atol=1e-12)


def test_pair_spec_validation():
    SubspacePairSpec(10, 4, 5, 2)
    with pytest.raises(InvalidDimensionError):
        SubspacePairSpec(10, 4, 5, 5)  # overlap exceeds d_p
    with pytest.raises(InvalidDimensionError):
        SubspacePairSpec(10, 11, 5, 2)
    with pytest.raises(InvalidDimensionError):
        SubspacePairSpec(10, 6, 6, 1)  # d_p + d_q - d_pq > d


def test_overlapping_pair_exact_overlap_count():
    rng = np.random.default_rng(7)
    for _ in range(15):
        d = int(rng.integers(4, 30))
        d_p = int(rng.integers(1, d + 1))
        d_q = int(rng.integers(1, d + 1))
        lo = max(0, d_p + d_q - d)
        d_pq = int(rng.integers(lo, min(d_p, d_q) + 1))
        u_p, u_q = overlapping_pair(SubspacePairSpec(d, d_p, d_q, d_pq), rng)
        angles = principal_angles(u_p, u_q)
        assert np.sum(angles.angles < 1e-8) == d_pq
        assert angles.angles.shape == (min(d_p, d_q),)
        assert np.all(np.diff(angles.angles) >= -1e-12)


def test_overlap_coefficient_matches_construction():
    # the Fig. 2 geometry: a = d_pq / d_q
    u_p, u_q = overlapping_pair(SubspacePairSpec(800, 720, 640, 560), 3)
    angles = principal_angles(u_p, u_q)
    assert overlap_coefficient(angles, 640) == pytest.approx(560 / 640, abs=1e-9)

    # half overlap gives a = 0.5
    u_p, u_q = overlapping_pair(SubspacePairSpec(40, 20, 10, 5), 4)
    angles = principal_angles(u_p, u_q)
    assert overlap_coefficient(angles, 10) == pytest.approx(0.5, abs=1e-9)


def test_similarity_overlap_identity():
    rng = np.random.default_rng(21)
    u_p, u_q = overlapping_pair(SubspacePairSpec(30, 12, 9, 4), rng)
    angles = principal_angles(u_p, u_q)
    k = len(angles.angles)
    lhs = subspace_similarity(angles, k) ** 2 * k
    rhs = overlap_coefficient(angles, 9) * 9
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_principal_angles_symmetric_in_arguments():
    rng = np.random.default_rng(5)
    u_p = haar_basis(25, 7, rng)
    u_q = haar_basis(25, 4, rng)
    cos_a = np.cos(principal_angles(u_p, u_q).angles)
    cos_b = np.cos(principal_angles(u_q, u_p).angles)
    nonzero_a = np.sort(cos_a[cos_a > 1e-9])
    nonzero_b = np.sort(cos_b[cos_b > 1e-9])
    npt.assert_allclose(nonzero_a, nonzero_b, atol=1e-9)


def test_identical_subspaces_similarity_one():
    basis = haar_basis(15, 6, 2)
    angles = principal_angles(basis, basis)
    npt.assert_allclose(angles.angles, 0.0, atol=1e-7)
    assert subspace_similarity(angles, 6) == pytest.approx(1.0, abs=1e-9)


def test_disjoint_subspaces_similarity_zero():
    u_p = OrthonormalBasis(np.eye(10)[:, :4])
    u_q = OrthonormalBasis(np.eye(10)[:, 4:8])
    angles = principal_angles(u_p, u_q)
    assert subspace_similarity(angles, 4) == pytest.approx(0.0, abs=1e-12)
    assert overlap_coefficient(angles, 4) == pytest.approx(0.0, abs=1e-12)
