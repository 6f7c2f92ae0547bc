"""The adaptive sampling and domain-learning loop.

Runs one trial of one of four methods over a shared level schedule:

* ``MC-LS``    - draws from the base grid measure with rejection, fits by
  unweighted least squares, never updates the domain estimate.
* ``ASGD-LS``  - the known-domain baseline: orthonormalizes and samples over
  the true discrete domain, so every draw is accepted.
* ``ASUD-LS``  - orthonormalizes over the current domain estimate, draws from
  the per-basis-function measures with rejection, fits by weighted least
  squares, and updates the estimate from the fit.
* ``ASUD-ALS`` - the augmented variant: only undefined evaluations are
  rejected, finite values outside the domain of interest join the fit and
  count against the estimate in the domain update.

Levels are hierarchical: samples drawn at earlier levels are recycled, and
only the incremental quota is drawn under the new measures.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .blackbox import Indicator, Problem, is_defined
from .errors import DomlearnError, EmptyEstimate, EmptyTrueDomain, RankDeficient, RedrawLimit
from .grid import DomainEstimate, Grid, full_estimate, restrict_measure
from .lsq import LsSystem, FitResult, assemble, solve
from .measures import (
    ChristoffelWeights,
    MeasureAssignment,
    Schedule,
    assign_measures,
    christoffel,
    cumulative,
    draw_from_cumulative,
)
from .metrics import LevelRecord, RunRecord, inv_alpha, mismatch_volume, reciprocal, rejection_rate, relative_error
from .polyspace import (
    QRFactors,
    assemble_B,
    eval_basis,
    eval_on_grid,
    hyperbolic_cross,
    orthonormal_values,
    qr_factor,
)

METHODS = ("MC-LS", "ASGD-LS", "ASUD-LS", "ASUD-ALS")

DEFAULT_MAX_REDRAWS = 100_000


@dataclass
class SamplingState:
    """Accepted and rejected draws of one trial, with the evaluation count.

    Lists are append-only; each entry is (grid row, oracle value).  In the
    augmented mode, finite values outside the domain of interest land in
    `accepted_outside` and only undefined draws land in `rejected`.
    """

    accepted: list = field(default_factory=list)
    accepted_outside: list = field(default_factory=list)
    rejected: list = field(default_factory=list)
    f_evals: int = 0

    def check_conservation(self) -> None:
        total = len(self.accepted) + len(self.accepted_outside) + len(self.rejected)
        if total != self.f_evals:
            raise AssertionError(
                f"bookkeeping violated: {self.f_evals} evaluations vs {total} recorded draws"
            )


@dataclass(frozen=True)
class SimulationTruth:
    """Ground truth for simulations: the true discrete domain and oracle values on it."""

    omega_active: np.ndarray
    f_omega: np.ndarray


def truth_from_values(values: np.ndarray, indicator: Indicator) -> SimulationTruth:
    """Derive the true discrete domain from precomputed full-grid oracle values."""
    vals = np.asarray(values, dtype=float)
    mask = indicator.accepts_values(vals)
    active = np.flatnonzero(mask).astype(np.intp)
    if active.size == 0:
        raise EmptyTrueDomain("no grid point lies in the domain of interest")
    return SimulationTruth(active, vals[active])


@dataclass
class MethodConfig:
    """Everything one trial needs: method, schedule, problem and grid references.

    `collect_stability` turns the 1/alpha diagnostic off when only the
    sampling metrics matter; it changes no random draws.
    """

    method: str
    schedule: Schedule
    orders: tuple[int, ...]
    problem: Problem
    grid: Grid
    max_redraws: int = DEFAULT_MAX_REDRAWS
    collect_stability: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if len(self.orders) != self.schedule.n_levels:
            raise ValueError("one hyperbolic-cross order per schedule level required")
        if self.problem.dim != self.grid.dim:
            raise ValueError("problem and grid dimensions disagree")
        if self.max_redraws < 1:
            raise ValueError("max_redraws must be >= 1")


@dataclass
class DrawResult:
    """Outcome of filling one sample slot."""

    index: int
    value: float
    inside: bool
    rejected: list
    evals: int


def rejection_sample(
    cum_probs: np.ndarray,
    active: np.ndarray,
    grid: Grid,
    problem: Problem,
    mode: str,
    rng: np.random.Generator,
    max_redraws: int = DEFAULT_MAX_REDRAWS,
) -> DrawResult:
    """Fill one sample slot by inverse-CDF draws over `active` with rejection.

    standard:  redraw until the indicator accepts the value; every failed
               draw is recorded as rejected.
    augmented: redraw only while the value is undefined; a finite value is
               accepted whether or not it lies in the domain of interest.
    known:     accept the first draw (the distribution is already supported
               on the true domain, so the membership test is vacuous).

    Raises RedrawLimit after `max_redraws` consecutive rejections, which
    signals that the measure puts numerically no mass on acceptable points.
    """
    rejected: list = []
    for _ in range(max_redraws):
        u = rng.random()
        pos = draw_from_cumulative(cum_probs, u)
        gidx = int(active[pos])
        value = problem.evaluate(grid.points[gidx])
        if mode == "known":
            return DrawResult(gidx, value, True, rejected, len(rejected) + 1)
        if mode == "augmented":
            if is_defined(value):
                inside = problem.indicator.accepts(value)
                return DrawResult(gidx, value, inside, rejected, len(rejected) + 1)
        elif mode == "standard":
            if problem.indicator.accepts(value):
                return DrawResult(gidx, value, True, rejected, len(rejected) + 1)
        else:
            raise ValueError(f"unknown sampling mode {mode!r}")
        rejected.append((gidx, value))
    raise RedrawLimit(f"no acceptable draw within {max_redraws} attempts")


def update_domain(
    grid: Grid,
    grid_values: np.ndarray,
    indicator: Indicator,
    state: SamplingState,
    mode: str,
) -> np.ndarray:
    """Next domain estimate from the fitted values and the sampling history.

    Standard mode keeps every point the fitted surrogate places inside, adds
    all accepted samples back (the fit need not interpolate them), and removes
    every rejected point.  Augmented mode additionally removes accepted points
    whose true value fell outside the domain of interest.
    """
    vals = np.asarray(grid_values, dtype=float)
    if vals.shape != (grid.size,):
        raise ValueError("grid_values must cover the whole grid")
    mask = indicator.accepts_values(vals)
    if state.accepted:
        mask[np.fromiter((i for i, _ in state.accepted), dtype=np.intp)] = True
    if mode == "augmented" and state.accepted_outside:
        mask[np.fromiter((i for i, _ in state.accepted_outside), dtype=np.intp)] = False
    if state.rejected:
        mask[np.fromiter((i for i, _ in state.rejected), dtype=np.intp)] = False
    active = np.flatnonzero(mask).astype(np.intp)
    if active.size == 0:
        raise EmptyEstimate("domain update produced an empty estimate")
    return active


@dataclass
class LevelContext:
    """Read-only view of one completed level, handed to the level hook."""

    level: int
    n_basis: int
    m_target: int
    estimate: DomainEstimate
    qr: QRFactors
    weights: ChristoffelWeights
    assignment: MeasureAssignment
    system: LsSystem
    fit: FitResult
    state: SamplingState
    record: LevelRecord
    updated_active: np.ndarray | None


def _sliced(qr: QRFactors, n: int) -> QRFactors:
    # Thin QR with positive diagonal is unique, so the leading-column QR of a
    # nested basis is exactly a slice of the full factorization.
    return QRFactors(qr.Q[:, :n], qr.R[:n, :n])


def _validate_nesting(index_set, schedule: Schedule, orders: tuple[int, ...]) -> None:
    wt = np.prod(index_set.indices + 1, axis=1)
    for n_l, order in zip(schedule.dims, orders):
        if int((wt <= order + 1).sum()) != n_l:
            raise ValueError(
                f"schedule dimension {n_l} does not match the hyperbolic cross of order {order}"
            )


def run(
    config: MethodConfig,
    seed,
    truth: SimulationTruth | None = None,
    level_hook: Callable[[LevelContext], None] | None = None,
) -> RunRecord:
    """Execute one trial and return its per-level metrics.

    `seed` may be an int or a numpy SeedSequence; identical (config, seed)
    reproduce an identical record bit for bit.  `truth` enables the
    simulation-only metrics (relative error, mismatch volume, 1/alpha) and is
    required for ASGD-LS.  Errors raised mid-run carry `.level` and
    `.partial_record` attributes with the completed levels.
    """
    method = config.method
    grid, problem, schedule = config.grid, config.problem, config.schedule
    if problem.evals != 0:
        raise ValueError("run requires a fresh problem (evaluation counter at 0)")
    if method == "ASGD-LS" and truth is None:
        raise ValueError("ASGD-LS needs the true discrete domain")

    rng = np.random.default_rng(seed)
    seed_label = seed if isinstance(seed, int) else repr(seed)

    n_max = schedule.dims[-1]
    index_set = hyperbolic_cross(grid.dim, config.orders[-1])
    if len(index_set) != n_max:
        raise ValueError("largest schedule dimension disagrees with its index set")
    _validate_nesting(index_set, schedule, config.orders)
    basis = eval_basis(index_set, grid.points)

    omega_est = omega_qr = None
    if truth is not None:
        omega_est = restrict_measure(grid, truth.omega_active)
        if config.collect_stability or method == "ASGD-LS":
            if omega_est.size < n_max:
                raise RankDeficient(
                    f"true domain has {omega_est.size} grid points, fewer than N_max = {n_max}"
                )
            omega_qr = qr_factor(assemble_B(omega_est, basis.values[omega_est.active]))

    whole = full_estimate(grid)
    base_qr = None
    if method == "MC-LS":
        base_qr = qr_factor(assemble_B(whole, basis.values))
        tau_cum = cumulative(grid.weights)
        tau_active = np.arange(grid.size, dtype=np.intp)
    elif method == "ASGD-LS":
        base_qr = omega_qr

    mode = {"MC-LS": "standard", "ASGD-LS": "known", "ASUD-LS": "standard", "ASUD-ALS": "augmented"}[method]
    adaptive = method in ("ASUD-LS", "ASUD-ALS")
    estimate = omega_est if method == "ASGD-LS" else whole

    state = SamplingState()
    records: list[LevelRecord] = []
    level = 0
    try:
        for level in range(1, schedule.n_levels + 1):
            n_l = schedule.dims[level - 1]
            m_l = schedule.counts[level - 1]

            # Stage (a): orthonormalize the level's space over the estimate.
            if estimate.size < n_l:
                raise RankDeficient(
                    f"estimate holds {estimate.size} points, fewer than N = {n_l}"
                )
            if adaptive:
                qr = qr_factor(assemble_B(estimate, basis.values[estimate.active, :n_l]))
            else:
                qr = _sliced(base_qr, n_l)
            cw = christoffel(qr, estimate)

            # Stage (b): draw the incremental sample quota.
            assignment = assign_measures(schedule, level)
            col_cums: dict[int, np.ndarray] = {}
            for j in assignment.columns:
                if method == "MC-LS":
                    cum, act = tau_cum, tau_active
                else:
                    j = int(j)
                    if j not in col_cums:
                        col_cums[j] = cumulative(qr.Q[:, j] ** 2)
                    cum, act = col_cums[j], estimate.active
                res = rejection_sample(cum, act, grid, problem, mode, rng, config.max_redraws)
                if res.inside:
                    state.accepted.append((res.index, res.value))
                else:
                    state.accepted_outside.append((res.index, res.value))
                state.rejected.extend(res.rejected)
            state.f_evals = problem.evals
            state.check_conservation()

            # Stage (c): fit on every retained sample.
            retained = state.accepted + state.accepted_outside
            idx = np.fromiter((i for i, _ in retained), dtype=np.intp, count=len(retained))
            vals = np.fromiter((v for _, v in retained), dtype=float, count=len(retained))
            system = assemble(
                qr,
                estimate,
                idx,
                vals,
                basis_rows=basis.values[idx, :n_l] if method == "ASUD-ALS" else None,
                unweighted=method == "MC-LS",
                allow_outside=method == "ASUD-ALS",
            )
            fit = solve(system)
            fit.grid_values = eval_on_grid(basis.values[:, :n_l], qr.R, fit.coeffs)

            # Stage (d): update the estimate (adaptive methods only).
            updated = None
            if adaptive:
                updated = update_domain(grid, fit.grid_values, problem.indicator, state, mode)

            if truth is not None:
                err = relative_error(
                    truth.f_omega, fit.grid_values[omega_est.active], omega_est.weights
                )
                mis = mismatch_volume(truth.omega_active, estimate.active)
                if config.collect_stability:
                    phi_omega = orthonormal_values(
                        omega_qr.R[:n_l, :n_l], basis.values[idx, :n_l]
                    )
                    ia = inv_alpha(phi_omega, system.weights)
                else:
                    ia = float("nan")
            else:
                err = mis = ia = float("nan")

            record = LevelRecord(
                level=level,
                n_basis=n_l,
                m_samples=m_l,
                f_evals=state.f_evals,
                n_accepted=len(state.accepted),
                n_rejected=len(state.rejected),
                n_accepted_outside=len(state.accepted_outside),
                err_rel=err,
                mismatch=mis,
                rejection=rejection_rate(state.f_evals, m_l),
                inv_alpha=ia,
                inv_beta=reciprocal(fit.sigma_min),
            )
            records.append(record)
            if level_hook is not None:
                level_hook(
                    LevelContext(
                        level, n_l, m_l, estimate, qr, cw, assignment, system, fit, state,
                        record, updated,
                    )
                )
            if adaptive:
                estimate = restrict_measure(grid, updated)
    except DomlearnError as exc:
        exc.level = level
        exc.partial_record = RunRecord(method, seed_label, tuple(records))
        raise
    return RunRecord(method, seed_label, tuple(records))
