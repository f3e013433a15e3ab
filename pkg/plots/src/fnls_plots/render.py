"""Figure drawing: one function per artifact kind, PNG + SVG out.

Annotations quote the JSON summary numbers verbatim (three decimals);
nothing is refitted from the CSV.  Output is byte-deterministic: fixed
hash salt, no date metadata, text kept as text in the SVG.
"""

import math
from pathlib import Path
from typing import Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .config import PlotSpec
from .errors import PlotDataError
from .reading import read_summary, read_table, result_number

_RC = {
    "svg.hashsalt": "fnls-plots",
    "svg.fonttype": "none",
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _finite_positive(xs, ys):
    pairs = [(x, y) for x, y in zip(xs, ys)
             if x > 0.0 and y > 0.0 and math.isfinite(x) and math.isfinite(y)]
    if not pairs:
        raise PlotDataError("no positive finite points to draw on log axes")
    return [p[0] for p in pairs], [p[1] for p in pairs]


def _annotate(ax, lines):
    ax.text(0.02, 0.02, "\n".join(lines), transform=ax.transAxes,
            fontsize=9, verticalalignment="bottom",
            bbox={"boxstyle": "round", "facecolor": "white", "alpha": 0.8})


def _draw_envelope(ax, spec: PlotSpec):
    table = read_table(spec.csv, ("N", "t", "ratio"))
    results = read_summary(spec.summary)
    slope = result_number(results, "slope", spec.summary)
    by_N = {}
    for N, t, ratio in zip(table["N"], table["t"], table["ratio"]):
        by_N.setdefault(int(N), ([], []))
        by_N[int(N)][0].append(t)
        by_N[int(N)][1].append(ratio)
    for N in sorted(by_N):
        ts, ratios = _finite_positive(*by_N[N])
        ax.plot(ts, ratios, label=f"N = {N}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("sup |kernel| / envelope")
    ax.legend(fontsize=8)
    _annotate(ax, [f"slope {slope:.3f}"])


def _draw_scaling(ax, spec: PlotSpec):
    table = read_table(spec.csv, ("N", "quotient"))
    results = read_summary(spec.summary)
    slope = result_number(results, "slope", spec.summary)
    predicted = result_number(results, "predicted", spec.summary)
    Ns, qs = _finite_positive(table["N"], table["quotient"])
    ax.plot(Ns, qs, "o-", label="measured")
    ref = [qs[0] * (N / Ns[0]) ** predicted for N in Ns]
    ax.plot(Ns, ref, "--", label="predicted power")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("quotient")
    ax.legend(fontsize=8)
    _annotate(ax, [f"slope {slope:.3f}", f"predicted {predicted:.3f}"])


def _draw_growth(ax, spec: PlotSpec):
    results = read_summary(spec.summary)
    fits = results.get("fits")
    if not isinstance(fits, dict) or not fits:
        raise PlotDataError(f"{spec.summary}: results lack a 'fits' table")
    cols = sorted(fits)
    table = read_table(spec.csv, ("t", *cols))
    lines = []
    for col in cols:
        ts, vals = _finite_positive(table["t"], table[col])
        ax.plot(ts, vals, label=col)
        expo = fits[col].get("exponent")
        if isinstance(expo, (int, float)) and not isinstance(expo, bool):
            lines.append(f"{col} slope {expo:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(fontsize=8)
    if lines:
        _annotate(ax, lines)


def _draw_gronwall(ax, spec: PlotSpec):
    table = read_table(spec.csv, ("t", "f"))
    results = read_summary(spec.summary)
    fitted = result_number(results, "fitted_exponent", spec.summary)
    predicted = result_number(results, "predicted", spec.summary)
    ts, fs = _finite_positive(table["t"], table["f"])
    ax.plot(ts, fs, label="f(t)")
    ref = [fs[-1] * (t / ts[-1]) ** predicted for t in ts]
    ax.plot(ts, ref, "--", label="predicted power")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("f")
    ax.legend(fontsize=8)
    _annotate(ax, [f"fitted {fitted:.3f}", f"predicted {predicted:.3f}"])


_DRAWERS = {
    "envelope": _draw_envelope,
    "scaling": _draw_scaling,
    "growth": _draw_growth,
    "gronwall": _draw_gronwall,
}


def render_plot(spec: PlotSpec) -> Tuple[Path, Path]:
    """Draw one figure; returns the (png, svg) paths written."""
    if spec.kind not in _DRAWERS:
        raise PlotDataError(f"unknown plot kind {spec.kind!r}")
    png = spec.out.with_suffix(".png")
    svg = spec.out.with_suffix(".svg")
    png.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            _DRAWERS[spec.kind](ax, spec)
            if spec.title:
                ax.set_title(spec.title)
            fig.tight_layout()
            fig.savefig(png, metadata={"Software": None})
            fig.savefig(svg, metadata={"Date": None})
        finally:
            plt.close(fig)
    return png, svg
