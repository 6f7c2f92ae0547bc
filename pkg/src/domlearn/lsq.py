"""Weighted least-squares fitting from orthonormalized bases.

Assembles the sampled design matrix and right-hand side from rows of the
Q factor (scaled by the Christoffel weights), solves the algebraic
least-squares problem, and computes stability constants of sampled design
matrices.  Sample points that lie outside the estimate the basis was
orthonormalized on (the augmented variant) are handled through the
polynomial extension of the orthonormal basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SampleOutsideEstimate, Underdetermined
from .grid import DomainEstimate
from .polyspace import QRFactors, orthonormal_values

SINGULAR_TOL = 1e-14


@dataclass(frozen=True)
class LsSystem:
    """Sampled least-squares system.

    Row i of `matrix` is sqrt(weights[i] / M) * phi(y_i); `rhs` carries the
    same scaling applied to the sample values.  `sample_indices` are the
    global grid rows of the sample points, with multiplicity: a repeated
    draw appears as a duplicated row.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    sample_indices: np.ndarray
    weights: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


@dataclass
class FitResult:
    """Least-squares solution in orthonormal-basis coordinates.

    `sigma_min` is the smallest singular value of the design matrix; the fit
    is still returned when it is numerically singular, with the flag set.
    `grid_values` is filled by the caller once the coefficients have been
    evaluated over the full grid.
    """

    coeffs: np.ndarray
    sigma_min: float
    flagged_singular: bool
    grid_values: np.ndarray | None = None


def assemble(
    qr: QRFactors,
    estimate: DomainEstimate,
    sample_indices: np.ndarray,
    sample_values: np.ndarray,
    basis_rows: np.ndarray | None = None,
    unweighted: bool = False,
    allow_outside: bool = False,
) -> LsSystem:
    """Build the sampled system for samples referenced by global grid index.

    Weighted mode uses w(y) = 1 / K(y) with K the normalized reciprocal
    Christoffel function of the orthonormalized space, evaluated at each
    sample; this reproduces the closed forms in terms of Q rows exactly when
    the restricted measure is uniform.  With `unweighted`, w = 1.

    Samples outside the active set raise SampleOutsideEstimate unless
    `allow_outside` is set, in which case their orthonormal-basis values are
    computed from `basis_rows` (reference-basis values at those samples).
    """
    idx = np.asarray(sample_indices, dtype=np.intp)
    vals = np.asarray(sample_values, dtype=float)
    if idx.shape != vals.shape or idx.ndim != 1 or idx.size == 0:
        raise ValueError("sample indices and values must be equal-length 1-D arrays")
    if not np.all(np.isfinite(vals)):
        raise ValueError("sample values must be finite; undefined draws never reach the fit")

    m = idx.size
    n = qr.n_basis
    pos = estimate.positions_of(idx)
    inside = pos >= 0
    if not allow_outside and not inside.all():
        bad = idx[~inside][0]
        raise SampleOutsideEstimate(f"sample at grid row {bad} is not in the active set")

    phi = np.empty((m, n))
    if inside.any():
        p = pos[inside]
        phi[inside] = qr.Q[p] / np.sqrt(estimate.weights[p])[:, None]
    if not inside.all():
        if basis_rows is None:
            raise ValueError("basis_rows required for samples outside the estimate")
        rows = np.asarray(basis_rows, dtype=float)
        if rows.shape != (m, n):
            raise ValueError("basis_rows must have one row per sample")
        phi[~inside] = orthonormal_values(qr.R, rows[~inside])

    if unweighted:
        w = np.ones(m)
    else:
        kvals = (phi ** 2).sum(axis=1) / n
        if np.any(kvals <= 0.0):
            raise ValueError("Christoffel weight undefined at a sample point")
        w = 1.0 / kvals
    scale = np.sqrt(w / m)
    return LsSystem(phi * scale[:, None], vals * scale, idx, w)


def solve(system: LsSystem) -> FitResult:
    """Minimize ||A x - b||_2 by an SVD-based (rank-revealing) solver.

    Raises Underdetermined when there are fewer rows than columns.  The
    smallest singular value is reported from the same decomposition.
    """
    m, n = system.shape
    if m < n:
        raise Underdetermined(f"{m} samples cannot determine {n} coefficients")
    coeffs, _, _, svals = np.linalg.lstsq(system.matrix, system.rhs, rcond=None)
    sigma_min = float(svals[-1])
    flagged = sigma_min < SINGULAR_TOL * float(svals[0])
    return FitResult(coeffs, sigma_min, flagged)


def stability_matrix(phi_rows: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Design matrix sqrt(w_i / M) * phi_j(y_i) for a given orthonormal basis."""
    rows = np.asarray(phi_rows, dtype=float)
    w = np.asarray(weights, dtype=float)
    if rows.ndim != 2 or w.shape != (rows.shape[0],):
        raise ValueError("one weight per sample row required")
    return rows * np.sqrt(w / rows.shape[0])[:, None]


def stability_alpha(phi_rows: np.ndarray, weights: np.ndarray) -> float:
    """Smallest singular value of the sampled design matrix.

    With `phi_rows` the values at the sample points of a basis orthonormal
    over the true discrete domain, this is the discrete stability constant
    of the fit measured against that domain's norm.  Computed from the
    triangular factor of the matrix, which shares its singular values, so
    the result stays accurate near rank deficiency.
    """
    B = stability_matrix(phi_rows, weights)
    R = np.linalg.qr(B, mode="r")
    return float(np.linalg.svd(R, compute_uv=False)[-1])
