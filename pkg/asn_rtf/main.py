"""Command-line entry point: `python -m asn_rtf.main <subcommand> --config <path>`."""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from asn_rtf import __version__
from asn_rtf.controllers.config_dump import cmd_config_dump
from asn_rtf.controllers.experiment import RunOutcome, apply_overrides, cmd_run
from asn_rtf.controllers.simulate import cmd_simulate
from asn_rtf.controllers.sweep import AXES, cmd_sweep
from asn_rtf.exceptions import AsnRtfError
from asn_rtf.services.storage.config_parser import parse_config
from asn_rtf.settings import DEFAULT_THREADS, LOG_FORMAT, LOG_LEVEL

logger = logging.getLogger("asn_rtf")

EXIT_OK = 0
EXIT_FAILURE = 1


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True, help="experiment config file")
    common.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
    common.add_argument("--seed", type=int, help="base seed (overrides [experiment] seed)")
    common.add_argument("--threads", type=int, default=DEFAULT_THREADS, help="worker threads, 0 = one per CPU")
    common.add_argument("--log-level", default=LOG_LEVEL, help="DEBUG, INFO, WARNING or ERROR")

    parser = argparse.ArgumentParser(
        prog="asn-rtf",
        description="RTF estimation and MVDR beamforming experiments for acoustic sensor networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("simulate", parents=[common], help="write one synthetic scene to disk")
    commands.add_parser("run", parents=[common], help="trial x SNR x method experiment to CSV")
    sweep = commands.add_parser("sweep", parents=[common], help="repeat the run along one axis")
    sweep.add_argument("--axis", choices=AXES, default="snr")
    sweep.add_argument("--values", type=_float_list, help="comma-separated axis values")
    commands.add_parser("config-dump", parents=[common], help="print the config with all defaults")
    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, stream=sys.stderr)


def _report(outcome: RunOutcome) -> None:
    summary = f"done: {len(outcome.frame)} rows, {outcome.failed_rows} failed, {outcome.warnings} warnings"
    if outcome.warnings:
        logger.warning(summary)
    else:
        logger.info(summary)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
    except ValueError:
        configure_logging("INFO")
        logger.warning(f"unknown log level {args.log_level!r}, using INFO")

    try:
        if args.command == "config-dump":
            sys.stdout.write(cmd_config_dump(args.config))
            return EXIT_OK

        config = apply_overrides(parse_config(args.config), seed=args.seed, out=args.out)
        if args.command == "simulate":
            for path in cmd_simulate(config):
                logger.info(f"wrote {path}")
        elif args.command == "run":
            _report(cmd_run(config, args.threads))
        else:
            _report(cmd_sweep(config, args.axis, args.values, args.threads))
    except (AsnRtfError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
