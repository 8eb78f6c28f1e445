#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging
import sys

from argparse import Namespace
from typing import List, Optional

import yaml

import bbp_homodyne

from bbp_homodyne.check import _main_check
from bbp_homodyne.core.scenario import load_scenario
from bbp_homodyne.errors import CapacityError, NumericError, TruncationError
from bbp_homodyne.run import ORACLE_KINDS, _main_oracle, _main_run
from bbp_homodyne.utils.cmdline import (
    EXIT_CHECK_FAILURE,
    EXIT_NO_INPUT,
    EXIT_SUCCESS,
    EXIT_TRUNCATION,
    EXIT_USAGE,
    EXIT_VALIDATION,
    _setup_logging,
    _str_to_bool,
    _UsageArgumentParser,
)


pylog = logging.getLogger(__name__)


def _print_usage() -> None:
    print(
        "Command line usage :\n"
        "- Run a scenario                 : bbp run --config CONFIG --out OUT [--force (false|true)] [--workers WORKERS] [--verbose VERBOSE]\n"
        "- Run the acceptance suite       : bbp check [--fast] [--verbose VERBOSE]\n"
        "- Run a single oracle path       : bbp oracle --kind (skellam|explicit-lo|hermite|outgoing-fock) --config CONFIG [--out OUT]\n"
        "- Print package install info     : bbp-info\n"
        "- Show this usage page           : bbp\n"
    )


def _add_verbose_arg(parser: _UsageArgumentParser, default: int) -> None:
    parser.add_argument(
        "--verbose",
        type=int,
        default=default,
        help="Verbose level of the script. 0 means silent mode, 1 is default mode and 2 add additional debugging outputs.",
    )


def _get_main_bbp_args(argv: Optional[List[str]] = None) -> Namespace:
    parser = _UsageArgumentParser(
        prog="bbp",
        description="Homodyne detection with calorimeters: BBP outcome laws and their convergence to the ideal quadrature.",
    )
    subparsers = parser.add_subparsers(
        dest="command",
        description="The command to run.",
        parser_class=_UsageArgumentParser,
    )

    run_subparser = subparsers.add_parser("run", help="Run a scenario and write its outputs.")
    run_subparser.add_argument("--config", type=str, required=True, help="Path to the scenario JSON file.")
    run_subparser.add_argument("--out", type=str, required=True, help="Output directory.")
    run_subparser.add_argument(
        "--force",
        type=_str_to_bool,
        default=False,
        help="Overwrite existing outputs in the output directory.",
    )
    run_subparser.add_argument(
        "--workers",
        type=int,
        default=1,
        help="Number of threads used to process the couplings of the sweep.",
    )
    _add_verbose_arg(run_subparser, 1)

    check_subparser = subparsers.add_parser("check", help="Run the built-in acceptance suite.")
    check_subparser.add_argument(
        "--fast",
        action="store_true",
        help="Only run the criteria whose total cutoff is at most 20.",
    )
    _add_verbose_arg(check_subparser, 0)

    oracle_subparser = subparsers.add_parser("oracle", help="Run a single oracle path of a scenario.")
    oracle_subparser.add_argument("--kind", type=str, required=True, choices=ORACLE_KINDS, help="The oracle path.")
    oracle_subparser.add_argument("--config", type=str, required=True, help="Path to the scenario JSON file.")
    oracle_subparser.add_argument(
        "--out",
        type=str,
        default=None,
        help="Output directory. If not given, only a summary is printed.",
    )
    oracle_subparser.add_argument(
        "--force",
        type=_str_to_bool,
        default=False,
        help="Overwrite existing outputs in the output directory.",
    )
    _add_verbose_arg(oracle_subparser, 0)

    args = parser.parse_args(argv)
    return args


def _run_command(args: Namespace) -> int:
    if args.command == "check":
        return EXIT_SUCCESS if _main_check(args) else EXIT_CHECK_FAILURE

    try:
        scenario = load_scenario(args.config)
    except FileNotFoundError as err:
        pylog.error(str(err))
        return EXIT_NO_INPUT

    if args.command == "run":
        _main_run(args, scenario)
    else:
        _main_oracle(args, scenario)
    return EXIT_SUCCESS


def _main_bbp(argv: Optional[List[str]] = None) -> int:
    args = _get_main_bbp_args(argv)
    if args.command is None:
        _print_usage()
        return EXIT_SUCCESS

    _setup_logging(bbp_homodyne.__package__, args.verbose)
    if args.verbose >= 2:
        pylog.debug(yaml.dump({"Arguments": args.__dict__}, sort_keys=False))

    try:
        return _run_command(args)
    except (TruncationError, CapacityError, NumericError) as err:
        pylog.error(f"{err.__class__.__name__}: {err}")
        return EXIT_TRUNCATION
    except (ValueError, FileExistsError, NotADirectoryError) as err:
        pylog.error(f"{err.__class__.__name__}: {err}")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(_main_bbp())
