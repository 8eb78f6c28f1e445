#!/usr/bin/env python
# -*- coding: utf-8 -*-

import platform
import sys

from pathlib import Path
from typing import Dict

import numpy
import scipy
import tqdm
import yaml

import bbp_homodyne

from bbp_homodyne.utils.limits import get_default_max_dim, get_default_sparse_dim


def get_package_repository_path() -> str:
    """Return the absolute path of the repository containing the bbp_homodyne sources."""
    return str(Path(bbp_homodyne.__file__).resolve().parents[2])


def get_dependencies_versions() -> Dict[str, str]:
    return {
        module.__name__: str(module.__version__)
        for module in (numpy, scipy, tqdm, yaml)
    }


def get_install_info() -> Dict[str, str]:
    """Return the bbp_homodyne version, the platform, the versions of the numerical dependencies and the current basis limits."""
    python_version = ".".join(map(str, sys.version_info[:3]))
    info = {
        "bbp_homodyne": bbp_homodyne.__version__,
        "python": python_version,
        "os": platform.system(),
        "architecture": platform.architecture()[0],
    }
    info.update(get_dependencies_versions())
    info.update(
        {
            "package_path": get_package_repository_path(),
            "max_dim": str(get_default_max_dim()),
            "sparse_dim": str(get_default_sparse_dim()),
        }
    )
    return info


def print_install_info() -> None:
    print(yaml.dump(get_install_info(), sort_keys=False))


if __name__ == "__main__":
    print_install_info()
