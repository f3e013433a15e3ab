"""Figure renderer for lab artifacts: CSV curves, JSON fit annotations.

Consumes only the files the experiment runner writes; all physics
numbers (slopes, exponents, predictions) are read from the JSON
summaries and never recomputed here.
"""

__version__ = "0.1.0"

from .config import PlotSpec, load_plot_specs
from .errors import PlotDataError, PlotSpecError
from .render import render_plot

__all__ = [
    "PlotDataError",
    "PlotSpec",
    "PlotSpecError",
    "load_plot_specs",
    "render_plot",
    "__version__",
]
