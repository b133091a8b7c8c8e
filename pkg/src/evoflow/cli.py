"""Command line entry point: ``evoflow run|list|version``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 a ``--check`` threshold was missed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .scenarios import ConfigError, NumericalFailure, list_scenarios, parse_config, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4

OUT_ENV = "EVOFLOW_OUT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evoflow", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config", type=Path, help="path to a key = value config file")
    run.add_argument("--check", action="store_true",
                     help="exit with code 4 when an acceptance check fails")
    run.add_argument("--out", type=Path, default=None,
                     help=f"output directory (default: ${OUT_ENV}, else ./evoflow_out/<name>)")

    sub.add_parser("list", help="list the scenario catalog")
    sub.add_parser("version", help="print the package version")
    return parser


def resolve_out_dir(explicit: Path | None, name: str) -> Path:
    if explicit is not None:
        return explicit
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path("evoflow_out") / name


def _cmd_run(args) -> int:
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = resolve_out_dir(args.out, cfg.name)
    try:
        report = run_scenario(cfg, out)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    sys.stdout.write(report.to_text())
    print(f"outputs written to {out}")
    if args.check and not report.passed:
        failed = ", ".join(k for k, ok in report.checks.items() if not ok)
        print(f"check failed: {failed}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        width = max(len(n) for n, _ in list_scenarios())
        for name, desc in list_scenarios():
            print(f"{name:<{width}}  {desc}")
        return EXIT_OK
    if args.command == "version":
        print(f"evoflow {__version__}")
        return EXIT_OK
    return _cmd_run(args)
