#!/usr/bin/env python3
"""Run the complete four-function study and export plot-ready data.

Desk profile finishes on a laptop; the full profile (K = 30000, N up to
1000, 50 trials) reproduces the large-scale curves and takes many hours.

    python3 scripts/run_full_study.py --out results --profile desk --jobs 2
"""
import argparse
from pathlib import Path

from domlearn.experiment import PROFILES, ExperimentConfig, export_plotdata, run_experiment

STUDY_DIMS = {1: (2, 3, 5, 10, 15), 2: (2, 3, 4, 5), 3: (2, 3, 4, 5), 4: (2, 3, 5, 10, 15)}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output root directory")
    parser.add_argument("--profile", choices=tuple(PROFILES), default="desk")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--jobs", type=int, default=2)
    parser.add_argument("--trials", type=int, help="override the profile's trial count")
    parser.add_argument("--functions", type=int, nargs="+", default=(1, 2, 3, 4),
                        choices=(1, 2, 3, 4))
    args = parser.parse_args()

    for fid in args.functions:
        out_dir = Path(args.out) / f"f{fid}"
        profile = dict(PROFILES[args.profile])
        if args.trials:
            profile["trials"] = args.trials
        config = ExperimentConfig(
            function_id=fid,
            dims=STUDY_DIMS[fid],
            master_seed=args.seed,
            out_dir=str(out_dir),
            jobs=args.jobs,
            **profile,
        )
        print(f"function {fid}: dims {STUDY_DIMS[fid]}, "
              f"K = {config.grid_size}, trials = {config.trials}")
        summary = run_experiment(config)
        n = export_plotdata(summary.aggregate_path, out_dir / "plotdata.csv")
        print(f"  -> {summary.aggregate_path} ({n} aggregate rows)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
