"""Command line entry point.

Subcommands: ``simulate``, ``estimate``, ``mc-table`` and ``design-check``.
Every subcommand also takes ``--config FILE`` with a JSON object whose keys
are option names (``"theta": "1,0.02,0.02"``, ``"reps": 1000``...); options
given on the command line win.

Exit codes: 0 success, 1 usage, 2 data error, 3 numeric/domain error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .design import case_family, design_diagnostics, grid_family
from .estimate import EstimateStatus, ValidityRule, estimate_params
from .model import GridError, ModelError, ModelParams, ObservationGrid
from .montecarlo import ExperimentConfig, run_coverage, run_experiment
from .panel_io import (
    PanelFormatError,
    dumps,
    estimation_report,
    format_panel,
    parse_panel_csv,
    report_text,
)
from .simulate import SeedSpec, simulate_panel

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with status 2
        self.print_help(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        values = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _theta(text: str) -> ModelParams:
    values = _floats(text)
    if len(values) != 3:
        raise argparse.ArgumentTypeError("theta takes three values xi,alpha,tau2")
    try:
        return ModelParams.from_sequence(values)
    except ModelError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _level(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {value}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _add_design_options(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid", type=_floats, help="window lengths shared by every item, e.g. 200,300,500")
    g.add_argument("--instants", type=_floats, help="observation instants shared by every item, e.g. 200,500,1000")
    g.add_argument("--case", type=int, choices=range(1, 6), help="canonical design family 1-5")
    p.add_argument("--T", type=float, default=1000.0, help="horizon of the case families (default 1000)")
    p.add_argument("--N", type=_positive_int, default=3, help="observations per item for case 1 (default 3)")


def _pattern(args: argparse.Namespace) -> list[float]:
    if args.instants is not None:
        grid = ObservationGrid((args.instants,))
        return list(grid.dt[0])
    return list(args.grid if args.grid is not None else (200.0, 300.0, 500.0))


def _grid_for(args: argparse.Namespace):
    """``n -> ObservationGrid`` for the design selected on the command line."""
    if args.case is not None:
        family = case_family(args.case, T=args.T, N=args.N, instants=args.instants)
        return family.grid
    dt = _pattern(args)
    return lambda n: ObservationGrid.repeated(dt, n)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pgamma", description="Inference for the gamma process perturbed by a Brownian motion")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a panel and write it as CSV")
    p.add_argument("--config", type=Path)
    p.add_argument("--theta", type=_theta, default=ModelParams(1.0, 0.02, 0.02), help="xi,alpha,tau2")
    p.add_argument("--n", type=_positive_int, default=10, help="number of items")
    _add_design_options(p)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--repetition", type=int, default=0)
    p.add_argument("--increments", action="store_true", help="write increments instead of cumulative values")
    p.add_argument("--output", "-o", type=Path)

    p = sub.add_parser("estimate", help="estimate parameters, intervals and tests from a panel CSV")
    p.add_argument("--config", type=Path)
    p.add_argument("--panel", type=Path)
    p.add_argument("--level", type=_level, default=0.95, help="confidence level (default 0.95)")
    p.add_argument("--significance", type=_level, default=0.05, help="size of the tau2 = 0 test")
    p.add_argument("--increments", action="store_true", help="the value column holds increments")
    p.add_argument("--no-clamp", dest="clamp", action="store_false", help="keep a negative tau2 estimate")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--json-output", type=Path, help="also write the JSON report here")
    p.add_argument("--output", "-o", type=Path)

    p = sub.add_parser("mc-table", help="Monte Carlo bias/MSE/StD table")
    p.add_argument("--config", type=Path)
    p.add_argument("--theta", type=_theta, default=ModelParams(1.0, 0.02, 0.02))
    _add_design_options(p)
    p.add_argument("--sizes", type=_ints, default=[50, 100, 200], help="sample sizes n")
    p.add_argument("--reps", type=_positive_int, default=1000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--validity", choices=[r.value for r in ValidityRule], default=ValidityRule.STRICT.value)
    p.add_argument("--no-clamp", dest="clamp", action="store_false")
    p.add_argument("--coverage", type=_level, help="also estimate coverage of intervals at this level")
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.add_argument("--output", "-o", type=Path)

    p = sub.add_parser("design-check", help="check design assumptions for a case family")
    p.add_argument("--config", type=Path)
    _add_design_options(p)
    p.add_argument("--horizon", type=int, default=10_000)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", "-o", type=Path)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.command is None:
        parser.error("a subcommand is required")
    if getattr(args, "config", None) is None:
        return args
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"--config: cannot read {args.config}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"--config: invalid JSON in {args.config}: {exc}") from None
    if not isinstance(config, dict):
        raise UsageError("--config: expected a JSON object")
    # re-parse with config values injected as defaults so explicit flags win
    subparser = parser._subparsers._group_actions[0].choices[args.command]  # type: ignore[union-attr]
    known = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest not in known or dest == "config":
            raise UsageError(f"--config: unknown option {key!r} for {args.command}")
        action = known[dest]
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        if action.type is not None and not isinstance(value, bool):
            try:
                value = action.type(value) if not isinstance(value, str) or action.type is not str else value
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"--config: {key}: {exc}") from None
        defaults[dest] = value
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        output.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def _cmd_simulate(args: argparse.Namespace) -> int:
    grid = _grid_for(args)(args.n)
    panel = simulate_panel(args.theta, grid, SeedSpec(args.seed, args.repetition))
    _emit(format_panel(grid, panel, increments=args.increments), args.output)
    return EXIT_OK


def _cmd_estimate(args: argparse.Namespace) -> int:
    if args.panel is None:
        raise UsageError("pgamma estimate: --panel is required")
    try:
        data = parse_panel_csv(args.panel, increments=args.increments)
    except FileNotFoundError:
        print(f"pgamma estimate: data error while reading panel: {args.panel} not found", file=sys.stderr)
        return EXIT_DATA
    except (PanelFormatError, GridError) as exc:
        print(f"pgamma estimate: data error while reading panel {args.panel}: {exc}", file=sys.stderr)
        return EXIT_DATA
    est = estimate_params(data.panel, data.grid, clamp_tau=args.clamp)
    report = estimation_report(est, data.grid, args.level, args.significance)
    report["item_ids"] = data.item_ids
    if args.json_output is not None:
        args.json_output.write_text(dumps(report) + "\n", encoding="utf-8")
    _emit(dumps(report) if args.format == "json" else report_text(report), args.output)
    if est.status is EstimateStatus.NON_INVERTIBLE:
        m = est.m_hat
        print(
            f"pgamma estimate: numeric error in estimation: moments not invertible (m1={m.m1:.6g}, cm3={m.cm3:.6g})",
            file=sys.stderr,
        )
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_mc_table(args: argparse.Namespace) -> int:
    sizes = list(args.sizes)
    grid = _grid_for(args) if args.case is not None else _pattern(args)
    try:
        config = ExperimentConfig(
            theta=args.theta,
            grid=grid,
            sample_sizes=sizes,
            repetitions=args.reps,
            master_seed=args.seed,
            clamp_tau=args.clamp,
            validity=ValidityRule(args.validity),
            workers=args.workers,
        )
    except ModelError as exc:
        raise UsageError(f"pgamma mc-table: --sizes/--reps/--workers: {exc}") from None
    table = run_experiment(config)
    text = table.to_csv() if args.format == "csv" else table.to_text()
    if args.coverage is not None:
        cov = run_coverage(config, args.coverage)
        text = text + "\n" + cov.to_csv()
    _emit(text, args.output)
    return EXIT_OK


def _cmd_design_check(args: argparse.Namespace) -> int:
    if args.case is not None:
        family = case_family(args.case, T=args.T, N=args.N)
    else:
        family = grid_family(ObservationGrid.from_dt([_pattern(args)]), name="shared windows")
    report = design_diagnostics(family, horizon=args.horizon)
    _emit(report.to_json() if args.format == "json" else report.to_text(), args.output)
    return EXIT_OK


COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "mc-table": _cmd_mc_table,
    "design-check": _cmd_design_check,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (PanelFormatError, GridError) as exc:
        print(f"pgamma {argv[0] if argv else ''}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ModelError as exc:
        print(f"pgamma {argv[0] if argv else ''}: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
