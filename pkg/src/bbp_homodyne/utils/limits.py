#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging
import os

from typing import Dict, Optional, Union


pylog = logging.getLogger(__name__)


__DEFAULT_LIMITS: Dict[str, Dict[str, Union[int, str, None]]] = {
    "max_dim": {
        "user": None,
        "env": "BBP_MAX_DIM",
        "package": 200_000,
    },
    "sparse_dim": {
        "user": None,
        "env": "BBP_SPARSE_DIM",
        "package": 5_000,
    },
}


# Public functions
def get_default_max_dim() -> int:
    """Returns the maximal dimension allowed for a truncated Fock basis.

    If :func:`~bbp_homodyne.utils.limits.set_default_max_dim` has been used before with an int argument, it will return the value given to this function.
    Else if the environment variable BBP_MAX_DIM has been set, it will return its value.
    Else it will be equal to 200000 by default.
    """
    return __get_default_limit("max_dim")


def get_default_sparse_dim() -> int:
    """Returns the basis dimension above which moments are computed with sparse matrix-vector products.

    If :func:`~bbp_homodyne.utils.limits.set_default_sparse_dim` has been used before with an int argument, it will return the value given to this function.
    Else if the environment variable BBP_SPARSE_DIM has been set, it will return its value.
    Else it will be equal to 5000 by default.
    """
    return __get_default_limit("sparse_dim")


def set_default_max_dim(max_dim: Optional[int]) -> None:
    """Override default maximal basis dimension. Use None to restore the environment or package value."""
    __set_default_limit("max_dim", max_dim)


def set_default_sparse_dim(sparse_dim: Optional[int]) -> None:
    """Override default sparse threshold. Use None to restore the environment or package value."""
    __set_default_limit("sparse_dim", sparse_dim)


# Private functions
def _get_max_dim(max_dim: Optional[int] = None) -> int:
    return __get_limit("max_dim", max_dim)


def _get_sparse_dim(sparse_dim: Optional[int] = None) -> int:
    return __get_limit("sparse_dim", sparse_dim)


def __get_default_limit(limit_name: str) -> int:
    limits = __DEFAULT_LIMITS[limit_name]

    for name, value_or_var in limits.items():
        if value_or_var is None:
            continue

        if name.startswith("env"):
            value = os.getenv(str(value_or_var), None)
            if value is None:
                continue
            try:
                return __process_limit(int(value))
            except ValueError:
                raise ValueError(
                    f"Invalid environment variable {value_or_var}={value}. (expected a positive integer)"
                )
        else:
            return __process_limit(value_or_var)  # type: ignore

    pylog.error(f"Limits values: {limits}")
    raise RuntimeError(
        f"Invalid default limit for limit_name={limit_name}. (all default limits are None)"
    )


def __set_default_limit(limit_name: str, value: Optional[int]) -> None:
    if value is not None:
        value = __process_limit(value)
    __DEFAULT_LIMITS[limit_name]["user"] = value


def __get_limit(limit_name: str, value: Optional[int] = None) -> int:
    if value is None:
        return __get_default_limit(limit_name)
    else:
        return __process_limit(value)


def __process_limit(value: int) -> int:
    value = int(value)
    if value <= 0:
        raise ValueError(f"Invalid argument value={value}. (expected a positive integer)")
    return value
