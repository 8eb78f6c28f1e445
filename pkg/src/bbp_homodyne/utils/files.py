#!/usr/bin/env python
# -*- coding: utf-8 -*-

import csv
import hashlib
import json
import logging
import os
import os.path as osp

from pathlib import Path
from typing import Any, Iterable, List, Mapping, Sequence, Union


pylog = logging.getLogger(__name__)

HASH_TYPES = ("sha256", "md5")
DEFAULT_CHUNK_SIZE = 64 * 1024**2  # 64 MiB
SIGNIFICANT_DIGITS = 17


def format_float(x: float) -> str:
    """Format a real number as decimal text with 17 significant digits (exact float round-trip)."""
    return format(float(x), f".{SIGNIFICANT_DIGITS}g")


def format_delta(delta: float) -> str:
    """Shortest round-trip text of a coupling value, used in output file names."""
    return repr(float(delta))


def write_csv(
    fpath: Union[str, Path],
    fieldnames: Sequence[str],
    columns: Iterable[Sequence[float]],
) -> str:
    """Write real-valued columns to a CSV file with a header line.

    :param fpath: The output file path.
    :param fieldnames: The header names, one per column.
    :param columns: The columns values, all of the same length.
    :returns: The path of the written file.
    """
    columns = [list(col) for col in columns]
    if len(columns) != len(fieldnames):
        raise ValueError(
            f"Invalid number of columns {len(columns)}. (expected {len(fieldnames)} columns for fieldnames={fieldnames})"
        )
    lens = set(map(len, columns))
    if len(lens) > 1:
        raise ValueError(f"Invalid columns lengths {sorted(lens)}. (expected equal lengths)")

    with open(fpath, "w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in zip(*columns):
            writer.writerow([format_float(value) for value in row])
    return str(fpath)


def read_csv_columns(fpath: Union[str, Path]) -> Mapping[str, List[float]]:
    with open(fpath, "r", newline="") as file:
        reader = csv.DictReader(file)
        fieldnames = list(reader.fieldnames or [])
        columns = {name: [] for name in fieldnames}
        for row in reader:
            for name in fieldnames:
                columns[name].append(float(row[name]))
    return columns


def write_json(fpath: Union[str, Path], data: Any) -> str:
    """Write a JSON document in canonical form (sorted keys, 2-space indent, trailing newline)."""
    content = json.dumps(data, indent=2, sort_keys=True, allow_nan=False)
    with open(fpath, "w") as file:
        file.write(content + "\n")
    return str(fpath)


def remove_outputs(
    fpaths: Iterable[Union[str, Path]],
    root: Union[str, Path, None] = None,
    rm_root: bool = True,
) -> List[str]:
    """Remove files written by an interrupted run, then the empty directories below root.

    :param fpaths: The files paths to remove. Missing files are ignored.
    :param root: Output directory. If not None, empty sub-directories are removed. defaults to None.
    :param rm_root: If True, remove the root directory when it is empty. defaults to True.
    :returns: The list of files and directories paths deleted.
    """
    deleted = []
    for fpath in fpaths:
        if osp.isfile(fpath):
            os.remove(fpath)
            deleted.append(str(fpath))

    if root is None or not osp.isdir(root):
        return deleted

    root = str(root)
    for dpath, dnames, fnames in os.walk(root, topdown=False):
        if not rm_root and dpath == root:
            continue
        elif len(os.listdir(dpath)) == 0:
            os.rmdir(dpath)
            deleted.append(dpath)

    pylog.debug(f"Removed {len(deleted)} partial output(s) in root='{root}'.")
    return deleted


def hash_file(
    fpath: Union[str, Path],
    hash_type: str = "sha256",
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> str:
    """Return the hash value for a file."""
    if hash_type == "sha256":
        hasher = hashlib.sha256()
    elif hash_type == "md5":
        hasher = hashlib.md5()
    else:
        raise ValueError(
            f"Invalid argument hash_type={hash_type}. (expected one of {HASH_TYPES})"
        )

    with open(fpath, "rb") as file:
        while True:
            chunk = file.read(chunk_size)
            if not chunk:
                break
            hasher.update(chunk)

    return hasher.hexdigest()


def hash_directory(root: Union[str, Path], hash_type: str = "sha256") -> Mapping[str, str]:
    """Return the hash of every file directly inside root, keyed by file name."""
    fnames = sorted(
        fname for fname in os.listdir(root) if osp.isfile(osp.join(root, fname))
    )
    return {fname: hash_file(osp.join(root, fname), hash_type) for fname in fnames}
