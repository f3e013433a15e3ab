"""Atomic, deterministic file output.

CSV: comma-separated, single header row, UTF-8, LF endings, floats at 17
significant digits (round-trip exact for float64).  JSON: UTF-8, sorted
keys.  Writes go to a temp file in the target directory followed by an
atomic rename, so interrupted runs never leave partial files behind.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path


def format_float(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def _atomic_write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_csv_atomic(path, header, rows):
    lines = [",".join(str(h) for h in header)]
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_json_atomic(path, obj):
    _atomic_write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")
