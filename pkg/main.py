"""Command-line entry point: predict, simulate, experiment and selftest."""

import argparse
import logging
import sys
from collections.abc import Sequence

from src.core.config import load_config
from src.core.errors import SedjocoError
from src.harness.report import ResultRow
from src.harness.runner import EXPERIMENT_IDS, cmd_experiment, run_to_csv
from src.harness.selftest import cmd_selftest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED_POINTS = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sedjoco",
        description="Predicted and empirical ISR of the Gaussian QMLE for IVA",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    predict = sub.add_parser("predict", help="prediction and bound only, no trials")
    predict.add_argument("--config", default="config/settings.yaml", help="YAML configuration")
    predict.add_argument("--seed", type=int, default=None, help="master seed override")
    predict.add_argument("--out", default=None, help="output directory for the CSV")
    predict.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    simulate = sub.add_parser("simulate", help="prediction plus Monte-Carlo trials")
    simulate.add_argument("--config", default="config/settings.yaml", help="YAML configuration")
    simulate.add_argument("--trials", type=int, default=None, help="trials per grid point")
    simulate.add_argument("--seed", type=int, default=None, help="master seed override")
    simulate.add_argument("--threads", type=int, default=None, help="worker processes")
    simulate.add_argument("--out", default=None, help="output directory for the CSV")
    simulate.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    simulate.add_argument("--progress", action="store_true", help="show a progress bar")

    experiment = sub.add_parser("experiment", help="run a named experiment preset")
    experiment.add_argument("id", choices=EXPERIMENT_IDS)
    experiment.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    experiment.add_argument("--full-scale", action="store_true", help="full-size trial counts")
    experiment.add_argument("--emit-plots", action="store_true", help="write a gnuplot script")
    experiment.add_argument("--out", default=None, help="output directory for the CSV")
    experiment.add_argument("--progress", action="store_true", help="show a progress bar")

    selftest = sub.add_parser("selftest", help="run the internal consistency checks")
    selftest.add_argument("--seed", type=int, default=0)
    return parser


def _overrides(args: argparse.Namespace) -> list[str]:
    overrides = list(args.override)
    if getattr(args, "seed", None) is not None:
        overrides.append(f"monte_carlo.master_seed={args.seed}")
    if getattr(args, "trials", None) is not None:
        overrides.append(f"monte_carlo.trials={args.trials}")
    if getattr(args, "threads", None) is not None:
        overrides.append(f"monte_carlo.threads={args.threads}")
    return overrides


def _exit_code(rows: Sequence[ResultRow]) -> int:
    failed = [row for row in rows if row.failed]
    if failed:
        logger.warning(f"{len(failed)} grid point(s) exceeded the excluded-trial budget")
        return EXIT_FAILED_POINTS
    return EXIT_OK


def run(args: argparse.Namespace) -> int:
    match args.command:
        case "selftest":
            results = cmd_selftest(args.seed)
            failed = [r.name for r in results if not r.passed]
            logger.info(f"Selftest: {len(results) - len(failed)}/{len(results)} checks passed")
            return EXIT_ERROR if failed else EXIT_OK
        case "experiment":
            path, rows = cmd_experiment(
                args.id, args.override, args.out, args.full_scale, args.emit_plots, args.progress
            )
        case _:
            config = load_config(args.config, _overrides(args))
            out_dir = args.out or config.report.out_dir
            simulate = args.command == "simulate"
            path, rows = run_to_csv(config, out_dir, simulate, progress=getattr(args, "progress", False))
    logger.info(f"Results written to {path}")
    return _exit_code(rows)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        return run(args)
    except (SedjocoError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
