"""lab: run experiments from JSON configs and summarize their reports.

    lab run CONFIG.json [--samples N] [--seed S] [--out DIR] [--workers W]
    lab report DIR
    lab list

Exit status: 0 when every record passes, 1 on a numerical failure, 2 on a
configuration error. The output directory is --out, else the config's
"output", else $LAB_OUT, else ./lab-results.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, report_suite, run, write_report
from .montecarlo import DEFAULT_SEED, default_workers

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
DEFAULT_OUT = "lab-results"


def _output_dir(args: argparse.Namespace, config: ExperimentConfig) -> Path:
    return Path(args.out or config.output or os.environ.get("LAB_OUT") or DEFAULT_OUT)


def cmd_run(args: argparse.Namespace) -> int:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = ExperimentConfig.parse(text)
        if args.samples is not None:
            config.samples = args.samples
        if args.seed is not None:
            config.seed = args.seed
        workers = args.workers or config.workers or default_workers()
        report = run(config, workers=workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    paths = write_report(report, _output_dir(args, config), path.stem)
    sys.stdout.write(report.table())
    print(f"wall clock {report.wall_seconds:.2f} s; report written to {paths['json']}")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_report(args: argparse.Namespace) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        print(f"error: {directory} is not a directory", file=sys.stderr)
        return EXIT_CONFIG
    summary = report_suite(directory)
    sys.stdout.write(summary.table())
    return EXIT_OK if summary.ok else EXIT_FAIL


def cmd_list(args: argparse.Namespace) -> int:
    width = max(len(name) for name in EXPERIMENTS)
    for name, exp in EXPERIMENTS.items():
        fields = ", ".join(exp.fields) or "-"
        print(f"{name.ljust(width)}  {exp.summary}")
        print(f"{'':{width}}  fields: {fields}; default samples {exp.default_samples}")
    print(f"default seed {DEFAULT_SEED}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description="Monte Carlo checks of curvature expectations")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="JSON config file")
    p_run.add_argument("--samples", type=int, help="override the sample count")
    p_run.add_argument("--seed", type=int, help=f"override the seed (default {DEFAULT_SEED})")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--workers", type=int, help="worker processes (default: all CPUs)")
    p_run.set_defaults(func=cmd_run)

    p_report = sub.add_parser("report", help="summarize every report in a directory")
    p_report.add_argument("directory")
    p_report.set_defaults(func=cmd_report)

    p_list = sub.add_parser("list", help="list experiments")
    p_list.set_defaults(func=cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which matches the config-error code
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
