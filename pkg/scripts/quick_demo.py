#!/usr/bin/env python3
"""Thirty-second demonstration: all four methods on one problem.

Approximates the first built-in test function in two dimensions at reduced
scale and prints the per-method endpoint metrics.
"""
import time

import numpy as np

from domlearn import METHODS, build_grid, indicator_for, make_problem, truth_from_values
from domlearn.blackbox import eval_test_function_batch
from domlearn.driver import MethodConfig, run
from domlearn.experiment import hc_ladder
from domlearn.measures import build_schedule

FID, DIM, K, N_MAX, SEED = 1, 2, 2000, 60, 42


def main() -> int:
    grid = build_grid(DIM, K, SEED)
    truth = truth_from_values(eval_test_function_batch(FID, grid.points), indicator_for(FID))
    orders, sizes = hc_ladder(DIM, N_MAX)
    schedule = build_schedule(sizes)
    print(f"function {FID}, d = {DIM}, K = {K}, levels = {schedule.n_levels}, "
          f"final N = {schedule.dims[-1]}, domain fraction = {truth.omega_active.size / K:.3f}")
    print(f"{'method':10s} {'time':>6s} {'F_final':>8s} {'E_final':>10s} "
          f"{'V_final':>8s} {'R_final':>8s} {'1/alpha':>8s}")
    for method in METHODS:
        config = MethodConfig(method, schedule, orders, make_problem(FID, DIM), grid)
        t0 = time.time()
        record = run(config, np.random.SeedSequence(SEED, spawn_key=(1, 0)), truth=truth)
        last = record.levels[-1]
        print(f"{method:10s} {time.time() - t0:5.1f}s {last.f_evals:8d} "
              f"{last.err_rel:10.2e} {last.mismatch:8.4f} {last.rejection:8.4f} "
              f"{last.inv_alpha:8.3g}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
