"""Sampling measures for hierarchical adaptive sampling.

Covers the level schedule (subspace dimensions, sampling ratios, cumulative
sample counts), the normalized reciprocal Christoffel function of the
orthonormalized space, the per-sample assignment of basis-function measures,
and inverse-CDF draws from discrete distributions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroChristoffel
from .grid import DomainEstimate, _frozen
from .polyspace import QRFactors

DIST_TOL = 1e-9


@dataclass(frozen=True)
class Schedule:
    """Per-level sampling plan: dims N_l, ratios k_l, cumulative counts M_l = k_l N_l."""

    dims: tuple[int, ...]
    ratios: tuple[int, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if not self.dims:
            raise ValueError("schedule needs at least one level")
        if any(n <= 0 for n in self.dims) or any(np.diff(self.dims) <= 0):
            raise ValueError("subspace dimensions must be positive and strictly increasing")
        if any(k < 1 for k in self.ratios) or any(np.diff(self.ratios) < 0):
            raise ValueError("sampling ratios must be >= 1 and non-decreasing")
        if any(m != k * n for n, k, m in zip(self.dims, self.ratios, self.counts)):
            raise ValueError("counts must equal ratio * dimension")
        if any(np.diff(self.counts) <= 0):
            raise ValueError("cumulative sample counts must be strictly increasing")

    @property
    def n_levels(self) -> int:
        return len(self.dims)


def build_schedule(dims) -> Schedule:
    """Schedule with k_l the closest integer to ln(N_l), clamped to >= 1.

    Ratios are forced non-decreasing by a running maximum so the hierarchical
    sample-assignment rule stays valid.
    """
    dims = tuple(int(n) for n in dims)
    ratios = []
    k_prev = 1
    for n in dims:
        k = max(1, int(math.floor(math.log(n) + 0.5)))
        k = max(k, k_prev)
        ratios.append(k)
        k_prev = k
    counts = tuple(k * n for k, n in zip(ratios, dims))
    return Schedule(dims, tuple(ratios), counts)


@dataclass(frozen=True)
class ChristoffelWeights:
    """Pointwise values of the normalized reciprocal Christoffel function.

    kvals[k] = (1/N) sum_j phi_j(z_k)^2 over the active points; wvals = 1/kvals
    is the least-squares weight function.
    """

    kvals: np.ndarray
    wvals: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kvals", _frozen(np.asarray(self.kvals, dtype=float)))
        object.__setattr__(self, "wvals", _frozen(np.asarray(self.wvals, dtype=float)))


def christoffel(qr: QRFactors, estimate: DomainEstimate) -> ChristoffelWeights:
    """Normalized reciprocal Christoffel function of the orthonormalized space.

    Computed from the Q factor as (1/N) sum_j Q[k,j]^2 / w_k.  Its integral
    against the restricted measure is exactly 1 by column orthonormality.
    Raises ZeroChristoffel if it vanishes anywhere on the active set, which
    cannot happen when the constant function is in the space.
    """
    if qr.Q.shape[0] != estimate.size:
        raise ValueError("QR factors do not match the estimate's active set")
    n = qr.n_basis
    kvals = (qr.Q ** 2).sum(axis=1) / (n * estimate.weights)
    if np.any(kvals <= 0.0):
        raise ZeroChristoffel("reciprocal Christoffel function vanishes on the active set")
    return ChristoffelWeights(kvals, 1.0 / kvals)


@dataclass(frozen=True)
class MeasureAssignment:
    """Basis-function measure for each new sample slot of one level.

    `start` is the 0-based global index of the first new sample (= M_{l-1});
    `columns[t]` is the 0-based basis-function index whose squared magnitude
    defines the sampling measure for global sample start + t.
    """

    level: int
    start: int
    columns: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "columns", _frozen(np.asarray(self.columns, dtype=np.intp)))


def assign_measures(schedule: Schedule, level: int) -> MeasureAssignment:
    """Measures for the new sample slots M_{l-1}+1 .. M_l (1-based `level`).

    Basis functions carried over from the previous level each receive
    k_l - k_{l-1} new draws; newly added basis functions receive k_l each.
    The totals telescope to M_l - M_{l-1}.
    """
    if level < 1 or level > schedule.n_levels:
        raise ValueError(f"level must be in 1..{schedule.n_levels}")
    n_prev = schedule.dims[level - 2] if level > 1 else 0
    k_prev = schedule.ratios[level - 2] if level > 1 else 0
    n_cur = schedule.dims[level - 1]
    k_cur = schedule.ratios[level - 1]
    m_prev = schedule.counts[level - 2] if level > 1 else 0

    cols: list[int] = []
    for j in range(n_prev):
        cols.extend([j] * (k_cur - k_prev))
    for j in range(n_prev, n_cur):
        cols.extend([j] * k_cur)
    assert len(cols) == schedule.counts[level - 1] - m_prev
    return MeasureAssignment(level, m_prev, np.array(cols, dtype=np.intp))


def cumulative(distribution: np.ndarray) -> np.ndarray:
    """Cumulative sums of a discrete distribution, normalized to end at 1.

    The input must sum to 1 within DIST_TOL; small drift is renormalized.
    """
    dist = np.asarray(distribution, dtype=float)
    total = float(dist.sum())
    if abs(total - 1.0) > DIST_TOL:
        raise ValueError(f"distribution sums to {total}, not 1")
    cum = np.cumsum(dist)
    cum /= cum[-1]
    return cum


def draw_from_cumulative(cum: np.ndarray, u: float) -> int:
    """First index whose cumulative probability strictly exceeds u, u in [0,1)."""
    return int(np.searchsorted(cum, u, side="right"))


def draw_index(distribution: np.ndarray, u: float) -> int:
    """Inverse-CDF draw from a discrete distribution using the variate u."""
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    return draw_from_cumulative(cumulative(distribution), u)
