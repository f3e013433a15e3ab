"""render: draw figures from a TOML plot spec.

Exit codes: 0 all figures written, 1 a figure failed on its inputs,
2 the spec itself is invalid (every violation listed on stderr).
"""

import argparse
import sys

from . import __version__
from .config import load_plot_specs
from .errors import PlotDataError, PlotSpecError
from .render import render_plot


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="render", description="Render lab CSV/JSON artifacts to PNG + SVG.")
    ap.add_argument("--version", action="version", version=f"render {__version__}")
    ap.add_argument("--spec", required=True, help="TOML file of [[plot]] blocks")
    ap.add_argument("--quiet", action="store_true", help="suppress per-figure lines")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        specs, violations = load_plot_specs(args.spec)
    except PlotSpecError as exc:
        print(exc, file=sys.stderr)
        return 2
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        return 2

    failed = 0
    for spec in specs:
        try:
            png, svg = render_plot(spec)
        except PlotDataError as exc:
            failed += 1
            print(f"FAIL {spec.out.name} [{spec.kind}]: {exc}", file=sys.stderr)
            continue
        if not args.quiet:
            print(f"wrote {png} {svg}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
