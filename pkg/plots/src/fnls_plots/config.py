"""Plot spec loading: TOML [[plot]] blocks, every violation reported."""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import PlotSpecError

PLOT_KINDS = ("envelope", "scaling", "growth", "gronwall")

_FIELDS = {"kind", "csv", "summary", "out", "title"}
_REQUIRED = ("kind", "csv", "summary", "out")


@dataclass(frozen=True)
class PlotSpec:
    """One figure: a CSV for curves, a JSON summary for annotations."""

    kind: str
    csv: Path
    summary: Path
    out: Path
    title: Optional[str] = None


def _block_violations(i: int, block) -> List[str]:
    path = f"plot[{i}]"
    if not isinstance(block, dict):
        return [f"{path}: expected a table"]
    out = []
    for key in sorted(set(block) - _FIELDS):
        out.append(f"{path}.{key}: unknown field")
    for key in _REQUIRED:
        if key not in block:
            out.append(f"{path}.{key}: required")
        elif not isinstance(block[key], str) or not block[key]:
            out.append(f"{path}.{key}: expected a non-empty string")
    if isinstance(block.get("kind"), str) and block["kind"] not in PLOT_KINDS:
        out.append(f"{path}.kind: unknown kind {block['kind']!r}; "
                   f"choose from {', '.join(PLOT_KINDS)}")
    if "title" in block and not isinstance(block["title"], str):
        out.append(f"{path}.title: expected a string")
    return out


def load_plot_specs(path) -> Tuple[List[PlotSpec], List[str]]:
    """Parse a spec file; relative artifact paths resolve against it.

    Returns (specs from clean blocks, all violations found); callers
    treat a non-empty violation list as fatal so partial rendering never
    hides a broken block.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise PlotSpecError(f"unreadable spec: {exc}") from None
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise PlotSpecError(f"TOML parse error: {exc}") from None

    violations = [f"{key}: unknown top-level key"
                  for key in sorted(set(doc) - {"plot"})]
    blocks = doc.get("plot", [])
    if not isinstance(blocks, list):
        raise PlotSpecError("plot: expected an array of tables ([[plot]])")
    if not blocks:
        violations.append("plot: no [[plot]] blocks")

    base = path.parent
    specs: List[PlotSpec] = []
    seen_out = {}
    for i, block in enumerate(blocks):
        errs = _block_violations(i, block)
        violations.extend(errs)
        if errs:
            continue
        out = Path(block["out"])
        if not out.is_absolute():
            out = base / out
        if out in seen_out:
            violations.append(
                f"plot[{i}].out: duplicates plot[{seen_out[out]}].out")
            continue
        seen_out[out] = i
        specs.append(PlotSpec(
            kind=block["kind"],
            csv=(base / block["csv"]) if not Path(block["csv"]).is_absolute()
            else Path(block["csv"]),
            summary=(base / block["summary"])
            if not Path(block["summary"]).is_absolute()
            else Path(block["summary"]),
            out=out,
            title=block.get("title"),
        ))
    return specs, violations
