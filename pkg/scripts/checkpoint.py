"""Sectioned text container for model parameters.

Layout::

    # salamnet checkpoint
    key=value            (header, one per line, written in the given order)
    ...
    [tensors]
    name rows cols
    v v v ...            (rows lines of cols values, 17 significant digits)
    ...

1-D tensors are stored as ``1 x n``; callers reshape them on load. Values round-trip
exactly, and identical inputs produce byte-identical files.
"""
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Tuple

import numpy as np

from scripts.errors import ConfigError, FormatError

LOGGER = logging.getLogger(__name__)

MAGIC = "# salamnet checkpoint"
TENSOR_SECTION = "[tensors]"


def _format_row(row: np.ndarray) -> str:
    return " ".join(f"{float(v):.17g}" for v in row)


def write_container(
    path: Path, header: Mapping[str, str], tensors: Mapping[str, np.ndarray]
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines: List[str] = [MAGIC]
    for key, value in header.items():
        if "=" in key or "\n" in key or "\n" in str(value):
            raise ConfigError(f"header entry {key!r} cannot be stored on one line")
        lines.append(f"{key}={value}")
    lines.append(TENSOR_SECTION)
    for name, tensor in tensors.items():
        if " " in name:
            raise ConfigError(f"tensor name {name!r} contains a space")
        matrix = np.atleast_2d(np.asarray(tensor, dtype=np.float64))
        if matrix.ndim != 2:
            raise ConfigError(f"tensor {name!r} has {matrix.ndim} dimensions")
        rows, cols = matrix.shape
        lines.append(f"{name} {rows} {cols}")
        lines.extend(_format_row(row) for row in matrix)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    LOGGER.debug("Wrote %d tensors to %s", len(tensors), path)


def read_container(path: Path) -> Tuple[Dict[str, str], Dict[str, np.ndarray]]:
    """Header mapping and 2-D tensors, in file order."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"checkpoint not found: {path}")
    with path.open("r", encoding="utf-8") as f:
        lines = f.read().split("\n")
    if not lines or lines[0] != MAGIC:
        raise FormatError(f"{path}: not a checkpoint file", 1)

    header: Dict[str, str] = {}
    pos = 1
    while pos < len(lines) and lines[pos] != TENSOR_SECTION:
        line = lines[pos]
        if line:
            key, sep, value = line.partition("=")
            if not sep:
                raise FormatError(f"{path}: header line without '='", pos + 1)
            header[key] = value
        pos += 1
    if pos == len(lines):
        raise FormatError(f"{path}: missing {TENSOR_SECTION} section")
    pos += 1

    tensors: Dict[str, np.ndarray] = {}
    while pos < len(lines):
        line = lines[pos]
        if not line:
            pos += 1
            continue
        parts = line.split(" ")
        try:
            name, rows, cols = parts[0], int(parts[1]), int(parts[2])
        except (IndexError, ValueError):
            raise FormatError(f"{path}: expected 'name rows cols'", pos + 1) from None
        if len(parts) != 3 or name in tensors:
            raise FormatError(f"{path}: bad or duplicate tensor header {line!r}", pos + 1)
        values = np.empty((rows, cols), dtype=np.float64)
        for r in range(rows):
            row_no = pos + 2 + r
            if row_no > len(lines):
                raise FormatError(f"{path}: tensor {name} is truncated", row_no)
            fields = lines[row_no - 1].split(" ") if cols else []
            if len(fields) != cols:
                raise FormatError(
                    f"{path}: tensor {name} row has {len(fields)} values, expected {cols}", row_no
                )
            try:
                values[r] = [float(v) for v in fields]
            except ValueError:
                raise FormatError(f"{path}: non-numeric value in tensor {name}", row_no) from None
        tensors[name] = values
        pos += 1 + rows
    return header, tensors
