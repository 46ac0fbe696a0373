"""Command-line interface for ecf_jumps."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from dataclasses import replace
from pathlib import Path
from typing import NoReturn, TextIO

import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from ecf_jumps import __version__
from ecf_jumps.config import (
    TRANSFORMS,
    RunConfig,
    curve_plan,
    level_plan,
    load_run_config,
    parse_jump_model,
    power_plan,
)
from ecf_jumps.ecf import compute_ecf
from ecf_jumps.errors import ConfigError, EcfJumpsError
from ecf_jumps.experiments import (
    ExperimentPlan,
    ExperimentReport,
    run_level_study,
    run_power_curve,
    run_power_study,
)
from ecf_jumps.exporter import (
    write_ecf_csv,
    write_json,
    write_path_csv,
    write_records_csv,
    write_report_csv,
    write_report_json,
)
from ecf_jumps.extractor import PriceSeries, load_csv
from ecf_jumps.inference import jump_test
from ecf_jumps.simulate import ModelSpec, simulate_path
from ecf_jumps.st_baseline import st_test

logger = logging.getLogger("ecf_jumps")

EXIT_OK = 0
EXIT_DATA = 2


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise ConfigError(f"{self.prog}: {message}")


def _setup_logging(verbose: bool) -> None:
    handler = RichHandler(
        console=Console(stderr=True), show_time=False, show_path=False
    )
    root = logging.getLogger("ecf_jumps")
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logging.captureWarnings(True)
    warnings_logger = logging.getLogger("py.warnings")
    warnings_logger.handlers[:] = [handler]


def _error(kind: str, message: str, exit_code: int) -> int:
    payload = {"error": kind, "message": message, "exit_code": exit_code}
    sys.stderr.write(json.dumps(payload) + "\n")
    return exit_code


def _output(path: Path | None) -> Path | TextIO:
    return sys.stdout if path is None else path


# -- subcommands -------------------------------------------------------------


def _load(args: argparse.Namespace, config: RunConfig) -> PriceSeries:
    return load_csv(
        args.input,
        date_column=config.date_column,
        value_column=config.value_column,
        transform=config.transform,
    )


def cmd_test(args: argparse.Namespace, config: RunConfig) -> int:
    series = _load(args, config)
    result = jump_test(series.sample(), alpha=config.alpha, window=config.slope_window)
    write_json(result.to_dict(transform=config.transform, seed=config.seed), _output(args.output))
    return EXIT_OK


def cmd_ecf(args: argparse.Namespace, config: RunConfig) -> int:
    series = _load(args, config)
    write_ecf_csv(compute_ecf(series.sample()), _output(args.output))
    return EXIT_OK


def cmd_st_test(args: argparse.Namespace, config: RunConfig) -> int:
    series = _load(args, config)
    result = st_test(series.observations(), p=args.power, k=args.k, alpha=config.alpha)
    write_json(result.to_dict(transform=config.transform), _output(args.output))
    return EXIT_OK


def _simulation_spec(args: argparse.Namespace, config: RunConfig) -> ModelSpec:
    spec = config.model
    if args.jumps is None:
        return spec
    items = {
        "kind": args.jumps,
        "size_law": args.size_law,
        "lam": args.lam,
        "prob_per_step": args.prob_per_step,
        "h": args.h,
        "tau": args.tau,
        "eta_var": args.eta_var,
        "location": args.location,
        "scale": args.scale,
    }
    jumps = parse_jump_model({k: str(v) for k, v in items.items() if v is not None})
    return ModelSpec(mu=spec.mu, sigma=spec.sigma, n=spec.n, jumps=jumps)


def cmd_simulate(args: argparse.Namespace, config: RunConfig) -> int:
    spec = _simulation_spec(args, config)
    seed = config.seed
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
        logger.warning("No seed given; using %d", seed)
    path = simulate_path(spec, seed, x0=args.x0)
    logger.info("simulated %d steps with %d jump(s)", spec.n, path.jump_count)
    write_path_csv(path, spec, _output(args.output))
    return EXIT_OK


def _run_study(
    args: argparse.Namespace,
    plan: ExperimentPlan,
    runner: Callable[[ExperimentPlan], ExperimentReport],
) -> int:
    if args.records:
        plan = replace(plan, keep_records=True)
    report = runner(plan)
    if args.json is not None:
        write_report_json(report, args.json, timings=args.timings, records=args.records)
    if args.csv is not None or args.json is None:
        write_report_csv(report, _output(args.csv), timings=args.timings)
    if args.records and args.records_csv is not None:
        write_records_csv(report, args.records_csv, timings=args.timings)
    return EXIT_OK


def cmd_mc_level(args: argparse.Namespace, config: RunConfig) -> int:
    return _run_study(args, level_plan(config, full=args.full), run_level_study)


def cmd_mc_power(args: argparse.Namespace, config: RunConfig) -> int:
    return _run_study(args, power_plan(config, full=args.full), run_power_study)


def cmd_power_curve(args: argparse.Namespace, config: RunConfig) -> int:
    return _run_study(args, curve_plan(config, full=args.full), run_power_curve)


# -- parser ------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with [run], [model], [jumps], [experiment]")
    common.add_argument("--seed", type=int)
    common.add_argument("--alpha", type=float, help="test level (default 0.05)")
    common.add_argument("--transform", choices=TRANSFORMS, help="default log_diff")
    common.add_argument("--slope-window", help="spacing half-width m, or 'auto'")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return common


def _input_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", type=Path, required=True, help="CSV file")
    p.add_argument("--date-column", help="date column, or 'none' (default DATE)")
    p.add_argument("--value-column", help="value column (default SP500)")
    p.add_argument("--output", type=Path, help="write here instead of standard output")


def _study_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--replications", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--n-values", help="comma-separated sample sizes")
    p.add_argument("--full", action="store_true", help="full-scale replication count")
    p.add_argument("--csv", type=Path, help="per-cell report CSV (default standard output)")
    p.add_argument("--json", type=Path, help="report JSON")
    p.add_argument("--records", action="store_true", help="keep per-replication records")
    p.add_argument("--records-csv", type=Path, help="per-replication records CSV")
    p.add_argument("--timings", action="store_true", help="include runtimes in reports")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _ArgumentParser(
        prog="ecf-jumps",
        description="Split-point test for jumps in discretely observed diffusions",
    )
    parser.add_argument("--version", action="version", version=f"ecf-jumps version {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("test", parents=[common], help="split-point test on a CSV series")
    _input_options(p)
    p.set_defaults(handler=cmd_test)

    p = sub.add_parser("ecf", parents=[common], help="empirical cross-over function as CSV")
    _input_options(p)
    p.set_defaults(handler=cmd_ecf)

    p = sub.add_parser("st-test", parents=[common], help="power-variation ratio test")
    _input_options(p)
    p.add_argument("--power", type=float, default=4.0, help="power p (default 4)")
    p.add_argument("--k", type=int, default=2, help="sampling scale factor (default 2)")
    p.set_defaults(handler=cmd_st_test)

    p = sub.add_parser("simulate", parents=[common], help="simulate a jump diffusion path")
    p.add_argument("--n", type=int, help="number of steps on [0, 1] (default 1000)")
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument(
        "--jumps", choices=("none", "constant", "compound_poisson", "bernoulli")
    )
    p.add_argument("--size-law", choices=("normal", "double_exponential", "constant"))
    p.add_argument("--lam", type=float)
    p.add_argument("--prob-per-step", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--eta-var", type=float)
    p.add_argument("--location", type=float)
    p.add_argument("--scale", type=float)
    p.add_argument("--output", type=Path)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("mc-level", parents=[common], help="level study without jumps")
    _study_options(p)
    p.set_defaults(handler=cmd_mc_level)

    p = sub.add_parser("mc-power", parents=[common], help="power study under jumps")
    _study_options(p)
    p.set_defaults(handler=cmd_mc_power)

    p = sub.add_parser("power-curve", parents=[common], help="power against jump-size mean or variance")
    _study_options(p)
    p.add_argument("--sweep", choices=("tau", "eta"))
    p.set_defaults(handler=cmd_power_curve)
    return parser


def _n_values(raw: str | None) -> tuple[int, ...] | None:
    if raw is None:
        return None
    try:
        return tuple(int(v) for v in raw.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"--n-values: expected integers, got {raw!r}") from None


def _config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "alpha": args.alpha,
        "transform": args.transform,
        "seed": args.seed,
        "slope_window": args.slope_window,
        "date_column": getattr(args, "date_column", None),
        "value_column": getattr(args, "value_column", None),
        "mu": getattr(args, "mu", None),
        "sigma": getattr(args, "sigma", None),
        "n": getattr(args, "n", None),
        "n_values": _n_values(getattr(args, "n_values", None)),
        "replications": getattr(args, "replications", None),
        "workers": getattr(args, "workers", None),
        "sweep": getattr(args, "sweep", None),
    }
    return load_run_config(args.config, overrides)


def main(argv: Sequence[str] | None = None) -> int:
    """CLI entry point.

    Returns:
        Exit code: 0 success, 1 usage error, 2 data error, 3 numeric degeneracy.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        return _error(exc.kind, str(exc), exc.exit_code)

    _setup_logging(args.verbose)
    try:
        config = _config(args)
        return int(args.handler(args, config))
    except EcfJumpsError as exc:
        logger.debug("%s failed", args.command, exc_info=True)
        return _error(exc.kind, str(exc), exc.exit_code)
    except FileNotFoundError as exc:
        return _error("missing-file", str(exc), EXIT_DATA)


if __name__ == "__main__":
    sys.exit(main())
