"""Evaluation metrics and per-run records.

Relative approximation error over the true discrete domain, mismatch volume
between the learned and true domains, rejection rate, and the reciprocal
stability constants of the sampled design matrices.  Also aggregates
per-trial records into per-level means.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyTrueDomain, ZeroNorm
from .lsq import LsSystem, stability_alpha


@dataclass(frozen=True)
class LevelRecord:
    """Metrics of one level of one trial."""

    level: int
    n_basis: int
    m_samples: int
    f_evals: int
    n_accepted: int
    n_rejected: int
    n_accepted_outside: int
    err_rel: float
    mismatch: float
    rejection: float
    inv_alpha: float
    inv_beta: float


@dataclass(frozen=True)
class RunRecord:
    """All per-level metrics of one (method, trial) run."""

    method: str
    seed: object
    levels: tuple[LevelRecord, ...]


def relative_error(f_true: np.ndarray, f_approx: np.ndarray, weights: np.ndarray) -> float:
    """Weighted relative L2 error ||f - g|| / ||f|| over the true discrete domain."""
    f = np.asarray(f_true, dtype=float)
    g = np.asarray(f_approx, dtype=float)
    w = np.asarray(weights, dtype=float)
    if not (f.shape == g.shape == w.shape):
        raise ValueError("value and weight arrays must share a shape")
    if not np.all(np.isfinite(f)):
        raise ValueError("reference values must be finite on the true domain")
    denom = float(np.sum(w * f * f))
    if denom <= 0.0:
        raise ZeroNorm("reference function has zero norm")
    num = float(np.sum(w * (f - g) ** 2))
    return math.sqrt(num / denom)


def mismatch_volume(true_active: np.ndarray, estimate_active: np.ndarray) -> float:
    """Size of the symmetric difference, normalized by the true domain size."""
    a = np.unique(np.asarray(true_active, dtype=np.intp))
    b = np.unique(np.asarray(estimate_active, dtype=np.intp))
    if a.size == 0:
        raise EmptyTrueDomain("true discrete domain is empty")
    common = np.intersect1d(a, b, assume_unique=True).size
    return (a.size + b.size - 2 * common) / a.size


def rejection_rate(f_evals: int, m_samples: int) -> float:
    """Fraction of evaluations spent on rejected draws, (F - M) / F."""
    if m_samples < 0 or f_evals < m_samples:
        raise ValueError("need f_evals >= m_samples >= 0")
    if f_evals == 0:
        return 0.0
    return (f_evals - m_samples) / f_evals


def reciprocal(sigma: float) -> float:
    """1 / sigma with an infinite sentinel instead of a crash at zero."""
    return math.inf if sigma == 0.0 else 1.0 / sigma


def inv_beta(system: LsSystem) -> float:
    """Reciprocal smallest singular value of the sampled design matrix."""
    sigma = float(np.linalg.svd(system.matrix, compute_uv=False)[-1])
    return reciprocal(sigma)


def inv_alpha(phi_rows: np.ndarray, weights: np.ndarray) -> float:
    """Reciprocal stability constant against the true-domain orthonormal basis.

    Only computable in simulations where the true discrete domain is known.
    """
    return reciprocal(stability_alpha(phi_rows, weights))


@dataclass(frozen=True)
class AggregateRow:
    """Across-trial means of the metrics of one level."""

    level: int
    n_basis: int
    m_samples: int
    f_evals: float
    err_rel: float
    mismatch: float
    rejection: float
    inv_alpha: float
    inv_beta: float
    trials_ok: int


def _mean(values, geometric: bool) -> float:
    vals = list(values)
    if geometric:
        if any(not math.isfinite(v) or v <= 0.0 for v in vals):
            return math.nan
        return math.exp(math.fsum(math.log(v) for v in vals) / len(vals))
    return math.fsum(vals) / len(vals)


def aggregate(records: list[RunRecord], geometric: bool = False) -> list[AggregateRow]:
    """Per-level means across trials; compensated summation, arithmetic by default."""
    if not records:
        return []
    n_levels = len(records[0].levels)
    for rec in records:
        if len(rec.levels) != n_levels:
            raise ValueError("records must cover the same levels to aggregate")
    rows = []
    for i in range(n_levels):
        per = [rec.levels[i] for rec in records]
        first = per[0]
        if any(p.n_basis != first.n_basis or p.m_samples != first.m_samples for p in per):
            raise ValueError("records disagree on the level schedule")
        rows.append(
            AggregateRow(
                level=first.level,
                n_basis=first.n_basis,
                m_samples=first.m_samples,
                f_evals=_mean((p.f_evals for p in per), geometric),
                err_rel=_mean((p.err_rel for p in per), geometric),
                mismatch=_mean((p.mismatch for p in per), geometric),
                rejection=_mean((p.rejection for p in per), geometric),
                inv_alpha=_mean((p.inv_alpha for p in per), geometric),
                inv_beta=_mean((p.inv_beta for p in per), geometric),
                trials_ok=len(per),
            )
        )
    return rows
