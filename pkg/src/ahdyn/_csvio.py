"""Locale-independent CSV writing shared by the noise and CLI layers."""
from __future__ import annotations

import os


def format_float(v: float) -> str:
    """Shortest representation that round-trips a float64, always with '.' decimal."""
    return format(v, ".17g")


def write_columns(path, header: str, *columns) -> None:
    """Write equal-length columns as UTF-8 CSV with the given header line."""
    n = len(columns[0])
    if any(len(c) != n for c in columns):
        raise ValueError("all columns must have equal length")
    lines = [header]
    for i in range(n):
        lines.append(",".join(format_float(float(c[i])) for c in columns))
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
