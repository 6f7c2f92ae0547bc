"""Command-line front end.

`domlearn run` executes an experiment battery over the built-in test
functions; `domlearn export` reshapes an aggregate CSV into plot-ready long
format.  Settings resolve in order: profile defaults, then a JSON config
file, then explicit flags.
"""
from __future__ import annotations

import argparse
import sys

from .driver import METHODS
from .experiment import (
    PROFILES,
    ExperimentConfig,
    export_plotdata,
    load_config_file,
    run_experiment,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="domlearn")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run an experiment battery")
    runp.add_argument("--function", type=int, choices=(1, 2, 3, 4),
                      help="built-in test function id")
    runp.add_argument("--dims", type=int, nargs="+", help="dimensions to run")
    runp.add_argument("--methods", nargs="+", choices=METHODS, help="methods to run")
    runp.add_argument("--grid-size", type=int, help="number of grid points K")
    runp.add_argument("--seed", type=int, help="master seed")
    runp.add_argument("--trials", type=int, help="trials per cell")
    runp.add_argument("--n-max", type=int, help="largest subspace dimension")
    runp.add_argument("--max-redraws", type=int, help="per-slot redraw cap")
    runp.add_argument("--out", help="output directory")
    runp.add_argument("--profile", choices=tuple(PROFILES), default="desk",
                      help="baseline scale (default: desk)")
    runp.add_argument("--config", help="JSON file mirroring the experiment config; "
                                       "flags override file values")
    runp.add_argument("--jobs", type=int, help="parallel trial workers (default 1)")

    expp = sub.add_parser("export", help="reshape an aggregate CSV for plotting")
    expp.add_argument("aggregate_csv", help="path to aggregate.csv")
    expp.add_argument("--out", required=True, help="output long-format CSV path")
    return parser


_FLAG_FIELDS = {
    "function": "function_id",
    "dims": "dims",
    "methods": "methods",
    "grid_size": "grid_size",
    "seed": "master_seed",
    "trials": "trials",
    "n_max": "n_max",
    "max_redraws": "max_redraws",
    "out": "out_dir",
    "jobs": "jobs",
}


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    settings: dict = dict(PROFILES[args.profile])
    if args.config:
        settings.update(load_config_file(args.config))
    for flag, fieldname in _FLAG_FIELDS.items():
        value = getattr(args, flag)
        if value is not None:
            settings[fieldname] = value
    if "function_id" not in settings:
        raise SystemExit("a test function is required (--function or config file)")
    return ExperimentConfig(**settings)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        config = resolve_config(args)
        summary = run_experiment(config)
        print(f"wrote {summary.per_trial_path}")
        print(f"wrote {summary.aggregate_path}")
        print(f"wrote {summary.manifest_path}")
        return 0
    if args.command == "export":
        n = export_plotdata(args.aggregate_csv, args.out)
        print(f"wrote {args.out} ({n} rows)")
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
