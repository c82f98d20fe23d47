"""Command-line front end.

Exit codes: 0 success, 1 failed validation, 2 bad configuration or I/O,
3 rank-deficient state, 4 cyclic analysis requested but no period exists.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from ..errors import ConfigError, CyclicityError, NonHermitianError, RankDeficientError
from . import runner, tables
from .config import load_run_config, parse_run_config, read_config_file

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_RANK = 3
EXIT_CYCLIC = 4

log = logging.getLogger("uhlquench")


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uhlquench", description="Uhlmann-quench dynamics of thermal states.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("trajectory", help="run one scenario and write its tables")
    tr.add_argument("--config", required=True, type=Path)

    sw = sub.add_parser("sweep", help="many temperatures (and angles) in parallel")
    sw.add_argument("--config", required=True, type=Path)

    va = sub.add_parser("validate", help="run the self-validation suite")
    va.add_argument("--level", choices=("fast", "full"), default="fast")
    va.add_argument("--report", type=Path, help="write the JSON report here instead of stdout")

    fg = sub.add_parser("figure1", help="tables for T = 1 and T = 0.01 at theta = pi/2")
    fg.add_argument("--out", required=True, type=Path)
    fg.add_argument("--t-max", type=_positive, default=runner.FIGURE1_T_MAX)
    fg.add_argument("--dt", type=_positive, default=runner.FIGURE1_DT)
    fg.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def _cmd_trajectory(args) -> int:
    cfg = load_run_config(args.config)
    res = runner.compute_run(cfg)
    for path in runner.write_run(res):
        print(path)
    return EXIT_OK


def _sweep_values(table: dict, key: str) -> list[float] | None:
    if key not in table:
        return None
    vals = table[key]
    if not isinstance(vals, list) or not vals or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in vals
    ):
        raise ConfigError(f"[sweep] {key} must be a non-empty list of finite numbers")
    return [float(v) for v in vals]


def _cmd_sweep(args) -> int:
    data = read_config_file(args.config)
    table = data.get("sweep")
    if not isinstance(table, dict):
        raise ConfigError("sweep config needs a [sweep] table")
    temps = _sweep_values(table, "temperatures")
    if temps is None:
        raise ConfigError("[sweep] needs 'temperatures'")
    if any(T <= 0 for T in temps):
        raise ConfigError("sweep temperatures must be positive")
    thetas = _sweep_values(table, "thetas")
    scenario = dict(data.get("scenario", {}))
    scenario.setdefault("temperature", temps[0])
    base = parse_run_config({**data, "scenario": scenario})
    try:
        configs = runner.sweep_configs(base, temps, thetas)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    results = runner.run_many(configs)
    for res in results:
        runner.write_run(res)
    summary = base.output.path / "sweep_summary.csv"
    tables.atomic_write(summary, tables.csv_text(runner.SWEEP_COLUMNS, runner.sweep_summary(results)))
    print(summary)
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .checks import run_checks

    report = run_checks(args.level)
    text = json.dumps(report, indent=1) + "\n"
    if args.report:
        tables.atomic_write(args.report, text)
    else:
        sys.stdout.write(text)
    for c in report["checks"]:
        log.info("%-30s %s", c["name"], "pass" if c["passed"] else "FAIL")
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def _cmd_figure1(args) -> int:
    if args.dt >= args.t_max:
        raise ConfigError(f"dt={args.dt} must be smaller than t_max={args.t_max}")
    configs = runner.figure1_configs(args.out, args.t_max, args.dt, args.format)
    results = runner.run_many(configs)
    for res in results:
        for path in runner.write_run(res):
            print(path)
    return EXIT_OK


COMMANDS = {
    "trajectory": _cmd_trajectory,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
    "figure1": _cmd_figure1,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, NonHermitianError) as exc:
        print(f"uhlquench: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"uhlquench: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RankDeficientError as exc:
        print(f"uhlquench: state is not full rank: {exc}", file=sys.stderr)
        return EXIT_RANK
    except CyclicityError as exc:
        print(f"uhlquench: no cyclic period: {exc}", file=sys.stderr)
        return EXIT_CYCLIC
