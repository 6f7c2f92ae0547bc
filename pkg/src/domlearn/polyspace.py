"""Hyperbolic-cross polynomial spaces over the grid.

Provides multi-index sets, tensorized Legendre basis evaluation, and the
QR-based orthonormalization of a polynomial space with respect to a
discrete domain estimate.  The multi-index ordering is nested: the list
for order n is a prefix of the list for any larger order, so subspaces
grow by appending basis functions and earlier samples stay valid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import CapacityExceeded, RankDeficient
from .grid import DomainEstimate, _frozen

RANK_TOL = 1e-12


@dataclass(frozen=True)
class IndexSet:
    """Hyperbolic-cross multi-index set of a given order.

    Indices are sorted by hyperbolic-cross weight prod(nu_k + 1), ties broken
    lexicographically, which makes index sets nested across orders.
    """

    dim: int
    order: int
    indices: np.ndarray  # (N, dim) integer array

    def __post_init__(self):
        object.__setattr__(self, "indices", _frozen(np.asarray(self.indices, dtype=np.int64)))

    def __len__(self) -> int:
        return self.indices.shape[0]

    def to_tuples(self) -> list[tuple[int, ...]]:
        """JSON-friendly representation: a list of integer tuples."""
        return [tuple(int(v) for v in row) for row in self.indices]

    @classmethod
    def from_tuples(cls, dim: int, order: int, tuples) -> "IndexSet":
        arr = np.asarray([list(t) for t in tuples], dtype=np.int64).reshape(len(tuples), dim)
        return cls(dim, order, arr)


def _enumerate_cross(dim: int, budget: int):
    """Yield all nu in N_0^dim with prod(nu_k + 1) <= budget."""
    if dim == 1:
        for v in range(budget):
            yield (v,)
        return
    for v in range(budget):
        for rest in _enumerate_cross(dim - 1, budget // (v + 1)):
            yield (v,) + rest


def hyperbolic_cross(dim: int, order: int, max_size: int = 1_000_000) -> IndexSet:
    """All multi-indices nu with prod(nu_k + 1) <= order + 1.

    Raises CapacityExceeded when the set grows past `max_size`.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if order < 0:
        raise ValueError("order must be >= 0")
    members = []
    for nu in _enumerate_cross(dim, order + 1):
        members.append(nu)
        if len(members) > max_size:
            raise CapacityExceeded(
                f"hyperbolic cross (d={dim}, n={order}) exceeds {max_size} indices"
            )
    members.sort(key=lambda nu: (int(np.prod([v + 1 for v in nu])), nu))
    return IndexSet(dim, order, np.array(members, dtype=np.int64))


def legendre_values(max_degree: int, x: np.ndarray) -> np.ndarray:
    """Legendre polynomials of degree 0..max_degree at the points `x`.

    Normalized against the uniform probability measure on [-1,1], so that
    L_0 = 1 and L_1(y) = sqrt(3) y.  Uses the classical three-term recurrence
    and rescales, which is stable on [-1,1].

    Returns an array of shape (len(x), max_degree + 1).
    """
    x = np.asarray(x, dtype=float)
    vals = np.empty((x.size, max_degree + 1))
    vals[:, 0] = 1.0
    if max_degree >= 1:
        vals[:, 1] = x
    for m in range(1, max_degree):
        vals[:, m + 1] = ((2 * m + 1) * x * vals[:, m] - m * vals[:, m - 1]) / (m + 1)
    vals *= np.sqrt(2.0 * np.arange(max_degree + 1) + 1.0)
    return vals


@dataclass(frozen=True)
class BasisEval:
    """Tensor-Legendre basis values: entry (i, j) is psi_j at point i."""

    values: np.ndarray
    index_set: IndexSet

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))


def eval_basis(index_set: IndexSet, points: np.ndarray) -> BasisEval:
    """Evaluate the tensorized orthonormal Legendre basis at the given points.

    Each basis function is the product over coordinates of 1-D normalized
    Legendre polynomials, so the column for nu = 0 is constantly 1.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != index_set.dim:
        raise ValueError(f"points must have shape (K, {index_set.dim})")
    if np.any(np.abs(pts) > 1.0):
        raise ValueError("basis evaluation points must lie in [-1,1]^d")
    indices = index_set.indices
    max_deg = indices.max(axis=0)
    uni = [legendre_values(int(max_deg[j]), pts[:, j]) for j in range(index_set.dim)]
    vals = np.empty((pts.shape[0], indices.shape[0]))
    for col, nu in enumerate(indices):
        prod = uni[0][:, nu[0]].copy()
        for j in range(1, index_set.dim):
            prod *= uni[j][:, nu[j]]
        vals[:, col] = prod
    return BasisEval(vals, index_set)


@dataclass(frozen=True)
class QRFactors:
    """Thin QR factors of a weighted basis matrix, with diag(R) > 0.

    Q has orthonormal columns over the discrete estimate; the orthonormal
    basis values are recoverable as phi_j(z_k) = Q[k, j] / sqrt(w_k) with
    w_k the restricted weights.
    """

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.Q, dtype=float)
        r = np.asarray(self.R, dtype=float)
        if q.ndim != 2 or r.shape != (q.shape[1], q.shape[1]):
            raise ValueError("inconsistent QR factor shapes")
        if np.any(np.diag(r) <= 0.0):
            raise ValueError("R must have a strictly positive diagonal")
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "R", r)

    @property
    def n_basis(self) -> int:
        return self.Q.shape[1]


def assemble_B(estimate: DomainEstimate, basis_rows: np.ndarray) -> np.ndarray:
    """Weighted basis matrix with entries sqrt(w_i) * psi_j(z_i).

    `basis_rows` must hold the basis values at exactly the estimate's active
    points, in active order.
    """
    rows = np.asarray(basis_rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] != estimate.size:
        raise ValueError("basis rows must align with the estimate's active points")
    return np.sqrt(estimate.weights)[:, None] * rows


def qr_factor(B: np.ndarray) -> QRFactors:
    """Thin QR of B with the sign convention diag(R) > 0.

    Raises RankDeficient when B has fewer rows than columns or when any
    |R_ii| falls below RANK_TOL * ||B||_F, meaning the subspace dimension
    exceeds the information in the current point set.
    """
    B = np.asarray(B, dtype=float)
    m, n = B.shape
    if m < n:
        raise RankDeficient(f"{n} basis functions on only {m} points")
    Q, R = np.linalg.qr(B, mode="reduced")
    scale = float(np.linalg.norm(R))  # == ||B||_F up to rounding
    diag = np.abs(np.diag(R))
    if scale == 0.0 or np.any(diag < RANK_TOL * scale):
        raise RankDeficient(
            f"numerically dependent basis columns (min |R_ii| = {diag.min():.3e})"
        )
    signs = np.sign(np.diag(R))
    return QRFactors(Q * signs, signs[:, None] * R)


def eval_on_grid(basis_values: np.ndarray, R: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Evaluate sum_i c_i phi_i over the grid as basis_values @ R^-1 c.

    Solved by back-substitution; R comes from a successful qr_factor call so
    it is invertible.
    """
    vals = np.asarray(basis_values, dtype=float)
    c = np.asarray(coeffs, dtype=float)
    if vals.shape[1] != R.shape[0] or c.shape != (R.shape[0],):
        raise ValueError("inconsistent shapes for grid evaluation")
    y = solve_triangular(R, c, lower=False, check_finite=False)
    return vals @ y


def orthonormal_values(R: np.ndarray, basis_rows: np.ndarray) -> np.ndarray:
    """Values of the orthonormalized basis at arbitrary points.

    Given reference-basis values psi(y) row-wise, returns phi(y) = psi(y) R^-1.
    At active grid points this agrees with Q[k, :] / sqrt(w_k); elsewhere it
    is the polynomial extension of the same functions.
    """
    rows = np.asarray(basis_rows, dtype=float)
    sol = solve_triangular(R, rows.T, trans="T", lower=False, check_finite=False)
    return sol.T
