"""Command-line front end: run one scenario, write one CSV.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import SCENARIOS, ConfigError, ExperimentSpec, SystemConfig, TargetSpec, load_config
from .experiments import run_experiment, write_csv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otfs-sense",
        description="OTFS radar-sensing Monte Carlo experiments",
    )
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", help="path to a config file (defaults apply if omitted)")
    parser.add_argument("--seed", type=int, help="override the experiment seed")
    parser.add_argument("--trials", type=int, help="override the trial count")
    parser.add_argument("--out", default="results.csv", help="output CSV path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            system, targets, experiment = load_config(args.config)
        else:
            system, targets, experiment = SystemConfig(), TargetSpec(), ExperimentSpec()
            system.validate()
            targets.validate(system)
        experiment = replace(experiment, scenario=args.scenario)
        if args.seed is not None:
            experiment = replace(experiment, seed=args.seed)
        if args.trials is not None:
            experiment = replace(experiment, trials=args.trials)
        experiment.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        rows = run_experiment(system, targets, experiment)
        write_csv(rows, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
