"""Command-line entry point.

``inpd simulate <config>`` runs a configured batch and writes logs plus
reports, ``inpd report <log-dir>`` regenerates reports from raw logs, and
``inpd validate <config>`` checks a configuration. Exit codes: 0 success,
1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, parse_config
from .engine import BatchRunError
from .runner import regenerate_reports, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inpd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an experiment batch and generate reports")
    sim.add_argument("config", help="experiment configuration JSON")
    sim.add_argument("--seed", type=int, default=None, help="override the master seed")
    sim.add_argument("--workers", type=int, default=None, help="override the worker count")
    sim.add_argument("--out", default=None, help="override the output directory")

    rep = sub.add_parser("report", help="regenerate reports from raw log CSVs")
    rep.add_argument("log_dir", help="directory of raw log CSVs")
    rep.add_argument("--out", default=None, help="output directory (default: parent of log dir)")

    val = sub.add_parser("validate", help="validate a configuration file")
    val.add_argument("config", help="experiment configuration JSON")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    if args.command == "validate":
        try:
            config = parse_config(args.config)
        except ConfigError as exc:
            print(f"invalid configuration: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(
            f"ok: {len(config.agents)} agent settings x {len(config.networks)} networks "
            f"x {len(config.matrices)} matrices x {config.sims_per_cell} sims "
            f"({config.run_count} runs of {config.rounds} rounds)"
        )
        return EXIT_OK

    if args.command == "simulate":
        try:
            config = parse_config(args.config)
        except ConfigError as exc:
            print(f"invalid configuration: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        try:
            out = run_experiment(
                config, workers=args.workers, out_dir=args.out, master_seed=args.seed
            )
        except BatchRunError as exc:
            print(f"batch failed: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        except Exception as exc:
            print(f"runtime failure: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"wrote {out}")
        return EXIT_OK

    if args.command == "report":
        try:
            out = regenerate_reports(args.log_dir, args.out)
        except (FileNotFoundError, ValueError) as exc:
            print(f"report failure: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"wrote {out}")
        return EXIT_OK

    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
