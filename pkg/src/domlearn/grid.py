"""Ambient discretization of the box D = [-1,1]^d.

Holds the fine point cloud Z with its discrete probability measure, and
normalized restrictions of that measure to subsets of grid indices.  The
grid is immutable after construction; every later stage refers to points
by their row index, so set operations on index arrays are exact.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyEstimate

WEIGHT_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """Finite point cloud in [-1,1]^d carrying a discrete probability measure.

    Attributes:
        dim: ambient dimension d.
        points: (K, d) array, each coordinate in [-1, 1].
        weights: (K,) nonnegative probabilities summing to 1.
        seed: integer seed the points were generated from, if any.
    """

    dim: int
    points: np.ndarray
    weights: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(f"points must have shape (K, {self.dim})")
        if pts.shape[0] < 1:
            raise ValueError("grid needs at least one point")
        if w.shape != (pts.shape[0],):
            raise ValueError("weights must have one entry per point")
        if np.any(np.abs(pts) > 1.0):
            raise ValueError("grid points must lie in [-1,1]^d")
        if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def size(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class DomainEstimate:
    """Normalized restriction of the grid measure to a subset of point indices.

    `active` is a sorted array of unique grid row indices; `weights` is the
    restricted measure over those rows, normalized to sum to 1.
    """

    active: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.active, dtype=np.intp)
        w = np.asarray(self.weights, dtype=float)
        if idx.size == 0:
            raise EmptyEstimate("domain estimate has no active points")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("active indices must be sorted and unique")
        if w.shape != idx.shape:
            raise ValueError("one weight per active index required")
        if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > WEIGHT_TOL:
            raise ValueError("restricted weights must be nonnegative and sum to 1")
        object.__setattr__(self, "active", _frozen(idx))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def size(self) -> int:
        return self.active.size

    def positions_of(self, grid_indices: np.ndarray) -> np.ndarray:
        """Map global grid indices to positions within `active`.

        Returns -1 for indices that are not active.
        """
        gi = np.asarray(grid_indices, dtype=np.intp)
        pos = np.searchsorted(self.active, gi)
        pos_clipped = np.minimum(pos, self.active.size - 1)
        hit = self.active[pos_clipped] == gi
        out = np.where(hit, pos_clipped, -1)
        return out.astype(np.intp)


def build_grid(dim: int, size: int, seed) -> Grid:
    """Draw `size` points i.i.d. uniformly from [-1,1]^dim with uniform weights.

    Identical (dim, size, seed) yields bit-identical grids.  `seed` may be an
    int or a numpy SeedSequence.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if size < 1:
        raise ValueError("size must be >= 1")
    rng = np.random.default_rng(seed)
    points = rng.uniform(-1.0, 1.0, size=(size, dim))
    weights = np.full(size, 1.0 / size)
    return Grid(dim, points, weights, seed=seed if isinstance(seed, int) else None)


def restrict_measure(grid: Grid, active) -> DomainEstimate:
    """Restrict the grid measure to `active` and renormalize.

    Raises EmptyEstimate when `active` is empty (the normalizing constant
    would vanish).
    """
    idx = np.unique(np.asarray(active, dtype=np.intp))
    if idx.size == 0:
        raise EmptyEstimate("cannot restrict the measure to an empty set")
    if idx[0] < 0 or idx[-1] >= grid.size:
        raise ValueError("active indices out of grid range")
    w = grid.weights[idx]
    total = float(w.sum())
    if total <= 0.0:
        raise EmptyEstimate("active set carries no measure")
    return DomainEstimate(idx, w / total)


def full_estimate(grid: Grid) -> DomainEstimate:
    """The trivial restriction to the whole grid."""
    return restrict_measure(grid, np.arange(grid.size))


def save_grid(grid: Grid, path) -> None:
    """Write the grid to CSV: a header row (d, K, seed) then one row per point."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["d", "K", "seed"])
        writer.writerow([grid.dim, grid.size, "" if grid.seed is None else grid.seed])
        for row in grid.points:
            writer.writerow([f"{x:.17g}" for x in row])


def load_grid(path) -> Grid:
    """Read a grid written by save_grid.  Weights are uniform."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["d", "K", "seed"]:
            raise ValueError(f"unexpected grid file header: {header}")
        dim_s, size_s, seed_s = next(reader)
        dim, size = int(dim_s), int(size_s)
        points = np.array([[float(x) for x in row] for row in reader])
    if points.shape != (size, dim):
        raise ValueError("grid file row count does not match its header")
    weights = np.full(size, 1.0 / size)
    return Grid(dim, points, weights, seed=None if seed_s == "" else int(seed_s))
