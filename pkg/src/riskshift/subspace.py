"""Linear subspaces: Haar-random bases, controlled-overlap pairs, principal angles.

Subspaces are represented by column-orthonormal matrices.  Overlap between two
subspaces is summarized by the principal angles, from which the similarity
sqrt(sum cos^2 / k) and the overlap coefficient sum cos^2 / d_Q are derived.
"""

from dataclasses import dataclass

import numpy as np

from riskshift.errors import InvalidDimensionError

_ORTHO_TOL = 1e-10


def _frozen_array(values, dtype=np.float64):
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class OrthonormalBasis:
    """Column-orthonormal d x k matrix spanning a rank-k subspace of R^d."""

    columns: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.columns, dtype=np.float64)
        if u.ndim != 2:
            raise InvalidDimensionError("basis columns must form a 2-d array")
        d, k = u.shape
        if k < 1 or k > d:
            raise InvalidDimensionError(f"need 1 <= rank <= ambient dim, got rank {k} in dim {d}")
        gram = u.T @ u
        if np.max(np.abs(gram - np.eye(k))) > _ORTHO_TOL:
            raise InvalidDimensionError("columns are not orthonormal within 1e-10")
        object.__setattr__(self, "columns", _frozen_array(u))

    @property
    def ambient_dim(self):
        return self.columns.shape[0]

    @property
    def rank(self):
        return self.columns.shape[1]

    def projector(self):
        """Dense projector U U^T onto the spanned subspace."""
        return self.columns @ self.columns.T

    def project(self, vec):
        """Project a length-d vector onto the subspace."""
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.ambient_dim,):
            raise InvalidDimensionError(
                f"expected vector of length {self.ambient_dim}, got shape {vec.shape}"
            )
        return self.columns @ (self.columns.T @ vec)


@dataclass(frozen=True)
class SubspacePairSpec:
    """Dimensions of an overlapping subspace pair: ambient, the two ranks, the shared rank."""

    d: int
    d_p: int
    d_q: int
    d_pq: int

    def __post_init__(self):
        for name in ("d", "d_p", "d_q", "d_pq"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise InvalidDimensionError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.d_p < 1 or self.d_q < 1:
            raise InvalidDimensionError("d_p and d_q must be at least 1")
        if self.d_pq < 0 or self.d_pq > min(self.d_p, self.d_q):
            raise InvalidDimensionError("need 0 <= d_pq <= min(d_p, d_q)")
        if self.d_p + self.d_q - self.d_pq > self.d:
            raise InvalidDimensionError("d_p + d_q - d_pq exceeds the ambient dimension")


@dataclass(frozen=True)
class PrincipalAngles:
    """Principal angles between two subspaces, radians in [0, pi/2], ascending."""

    angles: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.angles, dtype=np.float64)
        if theta.ndim != 1 or theta.size == 0:
            raise InvalidDimensionError("angles must form a nonempty 1-d array")
        if np.any(theta < -1e-12) or np.any(theta > np.pi / 2 + 1e-12):
            raise InvalidDimensionError("principal angles must lie in [0, pi/2]")
        if np.any(np.diff(theta) < -1e-12):
            raise InvalidDimensionError("principal angles must be sorted ascending")
        object.__setattr__(self, "angles", _frozen_array(theta))

    def __len__(self):
        return self.angles.size

    def cos_sq_sum(self):
        return float(np.sum(np.cos(self.angles) ** 2))


def haar_basis(d, k, seed):
    """Haar-distributed orthonormal d x k basis, deterministic per seed.

    QR of a standard normal matrix with the R diagonal forced positive; the
    sign fix removes the QR ambiguity and makes the law exactly Haar.
    """
    if k < 1 or k > d:
        raise InvalidDimensionError(f"need 1 <= k <= d, got k={k}, d={d}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, k))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return OrthonormalBasis(q * signs)


def overlapping_pair(spec, seed):
    """Two bases sharing a subspace of dimension exactly spec.d_pq.

    Built from disjoint-plus-shared coordinate blocks conjugated by one common
    Haar rotation, so exactly d_pq principal angles are 0 and the rest pi/2.
    """
    if not isinstance(spec, SubspacePairSpec):
        raise InvalidDimensionError("spec must be a SubspacePairSpec")
    rot = haar_basis(spec.d, spec.d, seed).columns
    u_p = rot[:, : spec.d_p]
    q_idx = list(range(spec.d_pq)) + list(range(spec.d_p, spec.d_p + spec.d_q - spec.d_pq))
    u_q = rot[:, q_idx]
    return OrthonormalBasis(u_p), OrthonormalBasis(u_q)


def principal_angles(u_p, u_q):
    """Principal angles between two subspaces via singular values of U_P^T U_Q."""
    if u_p.ambient_dim != u_q.ambient_dim:
        raise InvalidDimensionError(
            f"ambient dims differ: {u_p.ambient_dim} vs {u_q.ambient_dim}"
        )
    s = np.linalg.svd(u_p.columns.T @ u_q.columns, compute_uv=False)
    s = np.clip(s, 0.0, 1.0)
    # a cosine within fp noise of 1 is numerically indistinguishable from an
    # exact alignment, and arccos would amplify the ulp-level error to ~1e-8;
    # snap so construction-exact overlaps report exactly-zero angles
    s[s >= 1.0 - 1e-13] = 1.0
    theta = np.arccos(s)
    return PrincipalAngles(np.sort(theta))


def subspace_similarity(theta, k):
    """sqrt(sum_i cos^2 theta_i / k); 1 for aligned subspaces, 0 for orthogonal."""
    if k != len(theta):
        raise InvalidDimensionError(f"k={k} does not match {len(theta)} angles")
    return float(np.sqrt(theta.cos_sq_sum() / k))


def overlap_coefficient(theta, d_q):
    """sum_i cos^2 theta_i / d_q, the fraction of Q-energy captured by P."""
    if len(theta) > d_q:
        raise InvalidDimensionError(f"{len(theta)} angles exceed d_q={d_q}")
    return float(theta.cos_sq_sum() / d_q)
