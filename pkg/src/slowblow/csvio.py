"""Deterministic CSV reading/writing for all persisted artifacts.

Floats are serialized with 17 significant digits (lossless round-trip,
locale-independent), rows in a fixed order, '\n' line endings: identical
inputs produce bit-identical file bodies.
"""

from __future__ import annotations

import csv
from pathlib import Path


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, int):
        return str(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def read_columns(path, names: list[str]) -> list[list[float]]:
    """Parse the named columns as floats, in the order requested."""
    header, rows = read_csv(path)
    idx = []
    for name in names:
        if name not in header:
            raise KeyError(f"{path}: column {name!r} not found in {header}")
        idx.append(header.index(name))
    return [[float(row[i]) for row in rows] for i in idx]
