"""Command-line entry point: ``sitegrid {ingest,analyze,project,synth}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

from sitegrid.config import ConfigError, RunConfig, parse_grid
from sitegrid.dataset import DatasetError
from sitegrid.equity import EquityError
from sitegrid.metrics import MetricsError
from sitegrid.projection import ProjectionError
from sitegrid.report import cmd_analyze, cmd_ingest, cmd_project, cmd_synth
from sitegrid.strategies import StrategyError

COMMANDS = {
    "ingest": cmd_ingest,
    "analyze": cmd_analyze,
    "project": cmd_project,
    "synth": cmd_synth,
}
EXPECTED_ERRORS = (ConfigError, DatasetError, EquityError, MetricsError, ProjectionError, StrategyError, ValueError, OSError)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--grid", help="budget grid as start:step:end")
    common.add_argument("--strategies", help="comma-separated strategy names")
    common.add_argument("--baseline", help="baseline strategy for comparisons")
    common.add_argument("--granularity", choices=("zip", "state"))
    common.add_argument("--weighting", choices=("unit", "population"))

    parser = argparse.ArgumentParser(prog="sitegrid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="clean and join the input files")
    sub.add_parser("analyze", parents=[common], help="metrics, fits and equity on a cleaned dataset")
    sub.add_parser("project", parents=[common], help="strategy projections over the budget grid")
    synth = sub.add_parser("synth", parents=[common], help="write a seeded synthetic dataset")
    synth.add_argument("--n-zips", type=int, dest="n_zips")
    synth.add_argument("--profile")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {}
    for key in ("out", "seed", "baseline", "granularity", "weighting"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if args.grid:
        overrides["grid"] = parse_grid(args.grid)
    for key in ("n_zips", "profile"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if overrides:
        config = replace(config, **overrides)
    if args.strategies:
        config = config.select_strategies([s.strip() for s in args.strategies.split(",") if s.strip()])
    return config


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("SITEGRID_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        written = COMMANDS[args.command](config)
    except EXPECTED_ERRORS as exc:
        message = " ".join(str(exc).split())
        print(f"sitegrid: error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1
    for name in sorted(written):
        print(written[name])
    return 0


if __name__ == "__main__":
    sys.exit(main())
