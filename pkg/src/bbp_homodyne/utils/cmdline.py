#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging
import sys

from argparse import ArgumentParser
from typing import Dict, NoReturn


# sysexits-style codes returned by the bbp command
EXIT_SUCCESS = 0
EXIT_CHECK_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_TRUNCATION = 3
EXIT_USAGE = 64
EXIT_NO_INPUT = 66

_BOOL_VALUES: Dict[str, bool] = {
    **dict.fromkeys(("true", "1", "t", "yes", "y"), True),
    **dict.fromkeys(("false", "0", "f", "no", "n"), False),
}
_LOG_FORMAT = "[%(asctime)s][%(name)s][%(levelname)s] - %(message)s"


class _UsageArgumentParser(ArgumentParser):
    """ArgumentParser that exits with the usage code 64 instead of 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _str_to_bool(s: str) -> bool:
    key = str(s).strip().lower()
    if key not in _BOOL_VALUES:
        raise ValueError(
            f"Invalid argument s={s}. (expected one of {tuple(_BOOL_VALUES.keys())})"
        )
    return _BOOL_VALUES[key]


def _verbose_to_level(verbose: int) -> int:
    if verbose < 0:
        return logging.ERROR
    return (logging.WARNING, logging.INFO)[verbose] if verbose <= 1 else logging.DEBUG


def _setup_logging(pkg_name: str, verbose: int) -> None:
    """Attach a stdout handler to the package logger (once) and set its level from the verbose value."""
    pkg_logger = logging.getLogger(pkg_name)
    has_stdout_handler = any(
        isinstance(h, logging.StreamHandler) and h.stream is sys.stdout
        for h in pkg_logger.handlers
    )
    if not has_stdout_handler:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        pkg_logger.addHandler(handler)
    pkg_logger.setLevel(_verbose_to_level(verbose))
