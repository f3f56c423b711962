#!/usr/bin/env python3
'''
Penalized regression suite and simulation benchmark.

Usage:
    python main.py fit --method lasso --input data.csv --response y
    python main.py bench --scenario case1 --replications 200 --seed 7 --outdir results
    python main.py time --replications 20
    python main.py scenarios
    python main.py plot --outdir results

Exit codes: 0 ok, 2 usage or input error, 3 numerical failure,
4 some replications failed.
'''
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from config_loader import ConfigError, RunConfig, load_config, load_scenario, parse_methods
from data_integration import BenchmarkRunner, CSVDatasetReader, TimingRunner
from penalized import config
from penalized.core import DataError, NumericalError, standardize
from penalized.methods import MethodOptions, UnknownMethod, fit_method, resolve_tag
from penalized.simulator import ScenarioFamily, builtin_scenarios, find_scenario
from plotter import FigurePlotter, read_metric_tables, write_gnuplot_script

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4

DEFAULT_RUN_CONFIG = Path(__file__).resolve().parent / "config.yml"


class UsageError(Exception):
    '''argparse asked to exit with a usage message'''


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(description="Penalized least squares: fit on CSV data or run the simulation benchmark.")
    parser.add_argument("--verbose", action="store_true", help="Debug logging.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fit = sub.add_parser("fit", help="Fit one method to a CSV dataset.")
    fit.add_argument("--method", required=True, help="Method tag (e.g. lasso, ng-bic, scad).")
    fit.add_argument("--input", required=True, type=Path, help="CSV file with a header row.")
    fit.add_argument("--response", required=True, help="Name of the response column.")
    fit.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="Fixed penalty level; skips CV/GCV (per-observation scale).")
    fit.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="Seed for the CV folds.")
    fit.add_argument("--folds", type=int, default=config.DEFAULT_FOLDS, help="CV folds (default: 10).")

    for name, text in (("bench", "Run a scenario across all methods."),
                       ("time", "Time every method's full tuned procedure.")):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--scenario", default="timing" if name == "time" else "case1",
                         help="Built-in scenario name (see `scenarios`).")
        cmd.add_argument("--config", type=Path, default=None, help="Scenario file (JSON or YAML).")
        cmd.add_argument("--run-config", type=Path, default=None,
                         help="YAML run configuration (default: config.yml next to main.py).")
        cmd.add_argument("--method", default=None, help="Comma-separated method tags.")
        cmd.add_argument("--replications", type=int, default=None, help="Replications per sweep point.")
        cmd.add_argument("--seed", type=int, default=None, help="Base seed.")
        cmd.add_argument("--workers", type=int, default=None, help="Worker processes.")
        cmd.add_argument("--outdir", type=Path, default=None, help="Output directory.")
        cmd.add_argument("--no-progress", action="store_true", help="Hide the progress bar.")

    sub.add_parser("scenarios", help="List the built-in scenarios.")

    plot = sub.add_parser("plot", help="Render PNGs and a workbook from bench CSVs.")
    plot.add_argument("--outdir", type=Path, required=True, help="Directory holding bench output.")
    return parser


def cmd_fit(args: argparse.Namespace) -> int:
    tag = resolve_tag(args.method)
    d = CSVDatasetReader(args.input, args.response).read()
    s = standardize(d)
    options = MethodOptions(folds=args.folds, seed=args.seed, fixed_lambda=args.lam,
                            ridge_lambda=args.lam if tag == "ridge" else None)
    fit = fit_method(tag, s, options)
    for flag in fit.flags:
        logger.warning("%s: %s", tag, flag)
    json.dump(fit.to_record(d.names), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _run_config(args: argparse.Namespace) -> RunConfig:
    path = args.run_config
    if path is None and DEFAULT_RUN_CONFIG.exists():
        path = DEFAULT_RUN_CONFIG
    cfg = load_config(path)
    overrides = {}
    if args.method:
        overrides["methods"] = parse_methods(args.method)
    if args.replications is not None:
        overrides["replications"] = args.replications
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.outdir is not None:
        overrides["outdir"] = args.outdir
    if overrides.get("replications", 1) < 1 or overrides.get("workers", 1) < 1:
        raise ConfigError("replications and workers must be >= 1")
    if overrides.get("seed", 0) < 0:
        raise ConfigError("seed must be nonnegative")
    return replace(cfg, **overrides)


def _family(args: argparse.Namespace) -> ScenarioFamily:
    if args.config is not None:
        return load_scenario(args.config)
    return find_scenario(args.scenario)


def _run(runner: BenchmarkRunner, family: ScenarioFamily, cfg: RunConfig) -> int:
    result = runner.run(family)
    written = runner.write(result, cfg.outdir)
    if not isinstance(runner, TimingRunner):
        written.append(write_gnuplot_script(cfg.outdir, family.name, cfg.methods))
    for path in written:
        logger.info("wrote %s", path)
    if result.partial:
        logger.error("%d method fits failed; see %s.errors.csv", len(result.failures), family.name)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    return _run(BenchmarkRunner(cfg, progress=not args.no_progress), _family(args), cfg)


def cmd_time(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    return _run(TimingRunner(cfg, progress=not args.no_progress), _family(args), cfg)


def cmd_scenarios(args: argparse.Namespace) -> int:
    for family in builtin_scenarios():
        sys.stdout.write(json.dumps(family.describe()) + "\n")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    tables = read_metric_tables(args.outdir)
    if not tables:
        raise DataError(f"no metric CSVs found in {args.outdir}")
    plotter = FigurePlotter(args.outdir)
    plotter.plot(tables)
    plotter.save_excel(tables)
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "bench": cmd_bench,
    "time": cmd_time,
    "scenarios": cmd_scenarios,
    "plot": cmd_plot,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"[ERROR] {exc}\n")
        return EXIT_INPUT

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="[%(levelname)s] %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return COMMANDS[args.command](args)
    except (DataError, ConfigError, ValueError) as exc:
        if isinstance(exc, UnknownMethod):
            parser.print_usage(sys.stderr)
        logger.error("%s", exc)
        return EXIT_INPUT
    except NumericalError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
