"""Experiment orchestration and persistence.

Runs trial batteries over (function, dimension, method) cells against one
shared grid per dimension, writes per-trial and aggregated CSVs plus a JSON
manifest that makes every number reproducible, and reshapes aggregates into
plot-ready long-format files.
"""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .blackbox import indicator_for, make_problem, required_dim, eval_test_function_batch
from .driver import METHODS, MethodConfig, SimulationTruth, run, truth_from_values
from .errors import DomlearnError, SchemaMismatch
from .grid import Grid, build_grid
from .measures import build_schedule
from .metrics import RunRecord, aggregate
from .polyspace import hyperbolic_cross

PROFILES = {
    "desk": {"grid_size": 3000, "n_max": 150, "trials": 10},
    "full": {"grid_size": 30000, "n_max": 1000, "trials": 50},
}

PER_TRIAL_HEADER = [
    "method", "function", "d", "trial", "l",
    "N_l", "M_l", "F_l", "E_l", "V_l", "R_l", "inv_alpha", "inv_beta",
]
AGGREGATE_HEADER = [
    "method", "function", "d", "l",
    "N_l", "M_l", "F_l", "E_l", "V_l", "R_l", "inv_alpha", "inv_beta", "trials_ok",
]
PLOT_HEADER = [
    "method", "function", "d", "l",
    "N_l", "x_F", "x_M", "E_l", "V_l", "R_l", "inv_alpha", "inv_beta", "trials_ok",
]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


@dataclass
class ExperimentConfig:
    """Full experimental protocol for one battery of runs."""

    function_id: int
    dims: tuple[int, ...] = (2,)
    methods: tuple[str, ...] = METHODS
    grid_size: int = PROFILES["desk"]["grid_size"]
    master_seed: int = 42
    trials: int = PROFILES["desk"]["trials"]
    n_max: int = PROFILES["desk"]["n_max"]
    max_redraws: int = 100_000
    out_dir: str = "results"
    min_first_samples: int = 20
    jobs: int = 1
    geometric_mean: bool = False
    collect_stability: bool = True

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.methods = tuple(self.methods)

    def validate(self) -> None:
        if self.function_id not in (1, 2, 3, 4):
            raise ValueError("function_id must be one of 1..4")
        lo = required_dim(self.function_id)
        for d in self.dims:
            if d < lo:
                raise ValueError(f"test function {self.function_id} requires dim >= {lo}, got {d}")
        if not self.methods:
            raise ValueError("at least one method required")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.grid_size < 1 or self.n_max < 1 or self.max_redraws < 1 or self.jobs < 1:
            raise ValueError("grid_size, n_max, max_redraws and jobs must be positive")


def load_config_file(path) -> dict:
    """Read a JSON file mirroring ExperimentConfig field names."""
    with Path(path).open() as fh:
        data = json.load(fh)
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return data


def hc_ladder(dim: int, n_max: int, min_first_samples: int = 20) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Default level ladder: hyperbolic-cross orders 1, 2, ... capped at n_max basis functions.

    Leading levels whose cumulative sample count k_l * N_l falls below
    `min_first_samples` are dropped, because ratio metrics over very small
    counts carry a visible small-sample bias.  At least one level is kept.
    """
    orders, sizes = [], []
    order = 1
    while True:
        size = len(hyperbolic_cross(dim, order))
        if size > n_max:
            break
        orders.append(order)
        sizes.append(size)
        order += 1
    if not orders:
        raise ValueError(f"n_max = {n_max} admits no hyperbolic-cross level in dim {dim}")
    schedule = build_schedule(sizes)
    start = 0
    while start < len(sizes) - 1 and schedule.counts[start] < min_first_samples:
        start += 1
    return tuple(orders[start:]), tuple(sizes[start:])


def grid_seed_for(master_seed: int, dim: int) -> int:
    """Deterministic integer grid seed derived from (master seed, dimension)."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(0, dim))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_seed_for(master_seed: int, trial: int) -> np.random.SeedSequence:
    """Independent per-trial stream, shared across methods for paired comparisons."""
    return np.random.SeedSequence(master_seed, spawn_key=(1, trial))


def _truth_cache_path(out_dir: Path, fid: int, dim: int, grid_size: int, gseed: int) -> Path:
    return out_dir / "cache" / f"truth_f{fid}_d{dim}_K{grid_size}_s{gseed}.npz"


def load_or_compute_truth(
    grid: Grid, fid: int, cache_path: Path | None = None
) -> SimulationTruth:
    """Ground truth on the grid, cached to disk so reruns skip recomputation.

    The cached values never enter the evaluation budget; they are simulation
    instrumentation only.
    """
    if cache_path is not None and cache_path.exists():
        data = np.load(cache_path)
        return SimulationTruth(data["omega"].astype(np.intp), data["values"])
    values = eval_test_function_batch(fid, grid.points)
    truth = truth_from_values(values, indicator_for(fid))
    if cache_path is not None:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(cache_path, omega=truth.omega_active, values=truth.f_omega)
    return truth


def run_cell_trial(
    fid: int,
    dim: int,
    grid_size: int,
    gseed: int,
    method: str,
    orders: tuple[int, ...],
    sizes: tuple[int, ...],
    master_seed: int,
    trial: int,
    max_redraws: int,
    collect_stability: bool = True,
):
    """Execute one trial of one cell; rebuilds grid and truth deterministically.

    Returns ("ok", trial, RunRecord) or ("error", trial, message, levels_done).
    Standalone so trials can run in worker processes.
    """
    try:
        grid = build_grid(dim, grid_size, gseed)
        truth = load_or_compute_truth(grid, fid)
        config = MethodConfig(
            method=method,
            schedule=build_schedule(sizes),
            orders=orders,
            problem=make_problem(fid, dim),
            grid=grid,
            max_redraws=max_redraws,
            collect_stability=collect_stability,
        )
        record = run(config, trial_seed_for(master_seed, trial), truth=truth)
    except DomlearnError as exc:
        done = len(getattr(exc, "partial_record", RunRecord(method, trial, ())).levels)
        return ("error", trial, f"{type(exc).__name__}: {exc}", done)
    return ("ok", trial, record)


@dataclass
class ExperimentSummary:
    """Artifacts of one experiment: file paths plus the in-memory records."""

    per_trial_path: Path
    aggregate_path: Path
    manifest_path: Path
    records: dict = field(default_factory=dict)  # (method, dim) -> list[RunRecord]


def run_experiment(config: ExperimentConfig) -> ExperimentSummary:
    """Run every (dim, method) cell of the config and persist the results."""
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.time()

    per_trial_rows: list[list[str]] = []
    aggregate_rows: list[list[str]] = []
    cells = []
    grids_info = {}
    ladders_info = {}
    records_by_cell: dict = {}

    for dim in config.dims:
        gseed = grid_seed_for(config.master_seed, dim)
        grid = build_grid(dim, config.grid_size, gseed)
        cache = _truth_cache_path(out_dir, config.function_id, dim, config.grid_size, gseed)
        truth = load_or_compute_truth(grid, config.function_id, cache)
        orders, sizes = hc_ladder(dim, config.n_max, config.min_first_samples)
        schedule = build_schedule(sizes)
        grids_info[str(dim)] = {
            "seed": gseed,
            "size": config.grid_size,
            "omega_size": int(truth.omega_active.size),
            "omega_fraction": truth.omega_active.size / config.grid_size,
        }
        ladders_info[str(dim)] = {
            "orders": list(orders),
            "dims": list(schedule.dims),
            "ratios": list(schedule.ratios),
            "counts": list(schedule.counts),
        }

        for method in config.methods:
            args = [
                (
                    config.function_id, dim, config.grid_size, gseed, method,
                    orders, sizes, config.master_seed, trial, config.max_redraws,
                    config.collect_stability,
                )
                for trial in range(config.trials)
            ]
            if config.jobs > 1:
                with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                    outcomes = list(pool.map(_worker, args))
            else:
                outcomes = [run_cell_trial(*a) for a in args]

            ok_records: list[RunRecord] = []
            failures = []
            for outcome in outcomes:
                if outcome[0] == "ok":
                    _, trial, record = outcome
                    ok_records.append(record)
                    for lev in record.levels:
                        per_trial_rows.append(
                            [
                                method, str(config.function_id), str(dim), str(trial),
                                str(lev.level), str(lev.n_basis), str(lev.m_samples),
                                str(lev.f_evals), _fmt(lev.err_rel), _fmt(lev.mismatch),
                                _fmt(lev.rejection), _fmt(lev.inv_alpha), _fmt(lev.inv_beta),
                            ]
                        )
                else:
                    _, trial, message, levels_done = outcome
                    failures.append(
                        {"trial": trial, "error": message, "levels_completed": levels_done}
                    )
            records_by_cell[(method, dim)] = ok_records
            for row in aggregate(ok_records, geometric=config.geometric_mean):
                aggregate_rows.append(
                    [
                        method, str(config.function_id), str(dim), str(row.level),
                        str(row.n_basis), str(row.m_samples), _fmt(row.f_evals),
                        _fmt(row.err_rel), _fmt(row.mismatch), _fmt(row.rejection),
                        _fmt(row.inv_alpha), _fmt(row.inv_beta), str(row.trials_ok),
                    ]
                )
            cells.append(
                {
                    "method": method,
                    "function": config.function_id,
                    "d": dim,
                    "trials_ok": len(ok_records),
                    "failures": failures,
                }
            )

    per_trial_path = out_dir / "per_trial.csv"
    aggregate_path = out_dir / "aggregate.csv"
    _write_csv(per_trial_path, PER_TRIAL_HEADER, per_trial_rows)
    _write_csv(aggregate_path, AGGREGATE_HEADER, aggregate_rows)

    manifest = {
        "version": __version__,
        "wall_seconds": time.time() - t0,
        "config": asdict(config),
        "grids": grids_info,
        "ladders": ladders_info,
        "seed_scheme": {
            "grid": "SeedSequence(master_seed, spawn_key=(0, dim)) -> first uint64",
            "trial": "SeedSequence(master_seed, spawn_key=(1, trial))",
        },
        "cells": cells,
    }
    manifest_path = out_dir / "manifest.json"
    with manifest_path.open("w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return ExperimentSummary(per_trial_path, aggregate_path, manifest_path, records_by_cell)


def _worker(args):
    return run_cell_trial(*args)


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def export_plotdata(aggregate_csv, out_csv) -> int:
    """Reshape an aggregate CSV into a long-format file with both abscissas.

    Each aggregate row becomes one long row keyed by (method, function, d, l)
    carrying the evaluation count (x_F) and the sample count (x_M) side by
    side, so either can serve as the plot abscissa.  Values pass through as
    verbatim strings; nothing is recomputed.  Returns the number of rows.
    """
    src = Path(aggregate_csv)
    with src.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != AGGREGATE_HEADER:
            raise SchemaMismatch(f"unexpected aggregate columns: {header}")
        rows = list(reader)
    col = {name: i for i, name in enumerate(AGGREGATE_HEADER)}
    rows.sort(key=lambda r: (r[col["method"]], int(r[col["function"]]), int(r[col["d"]]), int(r[col["l"]])))
    out_rows = [
        [
            r[col["method"]], r[col["function"]], r[col["d"]], r[col["l"]],
            r[col["N_l"]], r[col["F_l"]], r[col["M_l"]], r[col["E_l"]], r[col["V_l"]],
            r[col["R_l"]], r[col["inv_alpha"]], r[col["inv_beta"]], r[col["trials_ok"]],
        ]
        for r in rows
    ]
    _write_csv(Path(out_csv), PLOT_HEADER, out_rows)
    return len(out_rows)
