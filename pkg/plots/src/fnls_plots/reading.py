"""Artifact ingestion with named-column errors."""

import csv
import json
from pathlib import Path
from typing import Dict, List, Sequence

from .errors import PlotDataError


def read_table(path, required: Sequence[str]) -> Dict[str, List[float]]:
    """Load a CSV into float columns; every required column must exist.

    The column check runs before the row check so a wrong schema is
    reported as such even when the file also happens to be empty.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise PlotDataError(f"{path}: empty file, no header") from None
            rows = list(reader)
    except OSError as exc:
        raise PlotDataError(f"unreadable csv: {exc}") from None

    missing = [c for c in required if c not in header]
    if missing:
        raise PlotDataError(
            f"{path}: missing column(s) {', '.join(missing)}; "
            f"header has {', '.join(header)}")
    if not rows:
        raise PlotDataError(f"{path}: no data rows")

    idx = {c: header.index(c) for c in required}
    table: Dict[str, List[float]] = {c: [] for c in required}
    for r, row in enumerate(rows, start=2):
        for c, j in idx.items():
            try:
                table[c].append(float(row[j]))
            except (IndexError, ValueError):
                cell = row[j] if j < len(row) else "<absent>"
                raise PlotDataError(
                    f"{path}: line {r}, column {c}: not a number "
                    f"({cell!r})") from None
    return table


def read_summary(path) -> dict:
    """Load an experiment JSON summary and return its results block."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise PlotDataError(f"unreadable summary: {exc}") from None
    except json.JSONDecodeError as exc:
        raise PlotDataError(f"{path}: JSON parse error: {exc}") from None
    if not isinstance(doc, dict) or "results" not in doc:
        raise PlotDataError(f"{path}: summary has no 'results' block")
    if not isinstance(doc["results"], dict):
        raise PlotDataError(f"{path}: 'results' is not a table")
    return doc["results"]


def result_number(results: dict, key: str, path) -> float:
    if key not in results:
        raise PlotDataError(f"{path}: results lack {key!r}")
    value = results[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise PlotDataError(f"{path}: results[{key!r}] is not a number")
    return float(value)
