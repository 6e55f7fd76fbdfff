"""CLI entry point for the staircase experiment harness.

Usage:
    python -m src.main rof-staircase --lambda 9 --n 10,100,1000 --out r.json
    python -m src.main hot-denoise --p 2 --noise square --csv-out u.csv
    python -m src.main compare --config runs/compare.env --jobs 4

Exit codes: 0 on success, 1 on invalid input or usage, 2 on numerical
failure (unsatisfiable plateau levels, non-converged descent).
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv

from src.harness.commands import handler_for
from src.harness.config import (
    COMMAND_PARAMS,
    UsageError,
    load_config_file,
    resolve_config,
    resolve_log_level,
)
from src.harness.output import build_record, write_csv, write_json
from src.restoration.errors import NumericalFailure, ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

COMMAND_HELP = {
    "rof-exact": "exact ROF minimizer of a monotone datum",
    "rof-staircase": "ROF reconstruction of staircase data over (n, lambda)",
    "hot-denoise": "higher-order minimizer of a noisy ramp or a signal CSV",
    "energy-eval": "discrete and relaxed energies of a signal or piecewise function",
    "cantor-fixture": "generalized Cantor construction and its variation bound",
    "compare": "ROF versus higher-order metrics on identical staircase data",
}


class HarnessArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> HarnessArgumentParser:
    """Build the parser; parameter flags default to None so that the config file can fill them."""
    common = HarnessArgumentParser(add_help=False)
    common.add_argument("--config", help="flat KEY=value file with parameter values")
    common.add_argument("--seed", help="seed recorded with the run (default: 0)")
    common.add_argument("--jobs", help="worker processes for sweeps (default: 1)")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--out", help="JSON output path (default: stdout)")
    common.add_argument("--csv-out", help="CSV output path")

    parser = HarnessArgumentParser(
        prog="staircase",
        description="Staircasing experiments for ROF and higher-order total variation models.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    for command, model in COMMAND_PARAMS.items():
        sub = subparsers.add_parser(command, parents=[common], help=COMMAND_HELP[command])
        for name, field in model.model_fields.items():
            key = field.alias or name
            default = "required" if field.is_required() else f"default: {field.default}"
            sub.add_argument(model.flag(key), dest=key, default=None, help=f"{field.description} ({default})")
    return parser


def _fail(message: str, code: int) -> int:
    logger.error(message)
    print(f"error: {message}", file=sys.stderr)
    return code


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one subcommand and write its outputs.

    Args:
        argv: Arguments without the program name; sys.argv[1:] when None.

    Returns:
        The process exit code.
    """
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        level = resolve_log_level(args.log_level)
    except SystemExit as e:
        # --help
        return EXIT_OK if e.code is None else int(e.code)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID

    logging.basicConfig(format=LOG_FORMAT, level=level)
    logging.getLogger().setLevel(level)

    try:
        cfg = resolve_config(args.command, vars(args), load_config_file(args.config))
        logger.info(f"Running {cfg.command} with {cfg.params}")
        result, frame = handler_for(cfg.command)(cfg)
    except NumericalFailure as e:
        return _fail(str(e), EXIT_NUMERICAL)
    except RuntimeError as e:
        return _fail(f"numerical failure: {e}", EXIT_NUMERICAL)
    except (ValidationError, ValueError, OSError) as e:
        return _fail(str(e), EXIT_INVALID)

    try:
        write_json(build_record(cfg.command, cfg.model_dump(), result), cfg.out)
        if cfg.csv_out and frame is not None:
            write_csv(frame, cfg.csv_out)
    except OSError as e:
        return _fail(f"could not write output: {e}", EXIT_INVALID)

    if result.get("error"):
        return _fail(result["error"], EXIT_NUMERICAL)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(run())
