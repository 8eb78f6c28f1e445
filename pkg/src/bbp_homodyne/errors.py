#!/usr/bin/env python
# -*- coding: utf-8 -*-

from typing import Optional


class CapacityError(RuntimeError):
    """Raised when a truncated Fock basis would exceed the configured maximal dimension."""


class TruncationError(RuntimeError):
    """Raised when a truncation budget cannot be met at the requested total cutoff."""


class NumericError(RuntimeError):
    """Raised when a numerical post-condition (eigensolver residual, Hermitian moment, ...) fails."""


class BasisMismatchError(ValueError):
    pass


class ScenarioError(ValueError):
    """Raised when a scenario document does not follow the scenario schema.

    :param message: The description of the problem.
    :param path: The JSON path of the offending field (e.g. ``$.state.kind``). defaults to "$".
    """

    def __init__(self, message: str, path: Optional[str] = None) -> None:
        if path is None:
            path = "$"
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message
