"""Deterministic PNG line plots for annotation inputs.

Rendering goes through matplotlib's object-oriented Agg path (no pyplot
state machine), so concurrent renders to distinct paths are safe and the
bytes are reproducible for a fixed matplotlib version. The PNG metadata
is pinned to a constant string to keep files byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .errors import DataError, ValidationError
from .features import SeriesLike, _values

__all__ = ["render_plot", "axis_limits"]

WIDTH_PX = 800
HEIGHT_PX = 600
DPI = 100
LINE_COLOR = "#1f77b4"
LINE_WIDTH = 1.5
PAD_FRACTION = 0.02
_PNG_METADATA = {"Software": "tsdistill-plot"}


def axis_limits(values: np.ndarray) -> tuple[tuple[float, float], tuple[float, float]]:
    """X/Y limits covering the data with 2% padding on each side."""
    n = len(values)
    x_span = max(n - 1, 1)
    x_pad = PAD_FRACTION * x_span
    y_min, y_max = float(values.min()), float(values.max())
    y_pad = PAD_FRACTION * (y_max - y_min) if y_max > y_min else max(abs(y_min), 1.0) * PAD_FRACTION
    return (0.0 - x_pad, (n - 1) + x_pad), (y_min - y_pad, y_max + y_pad)


def render_plot(series: SeriesLike, path: str | Path) -> Path:
    """Write an 800x600 single-line PNG; same input gives identical bytes."""
    values = _values(series)
    if len(values) == 0:
        raise ValidationError("cannot render an empty series")
    if not np.all(np.isfinite(values)):
        raise DataError("cannot render non-finite values")
    path = Path(path)

    fig = Figure(figsize=(WIDTH_PX / DPI, HEIGHT_PX / DPI), dpi=DPI, facecolor="white")
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111)
    ax.set_facecolor("white")
    ax.plot(np.arange(len(values)), values, color=LINE_COLOR, linewidth=LINE_WIDTH)
    (x_lo, x_hi), (y_lo, y_hi) = axis_limits(values)
    ax.set_xlim(x_lo, x_hi)
    ax.set_ylim(y_lo, y_hi)
    try:
        fig.savefig(path, format="png", dpi=DPI, metadata=_PNG_METADATA)
    except OSError as exc:
        raise DataError(f"failed to write plot to {path}: {exc}") from exc
    return path
