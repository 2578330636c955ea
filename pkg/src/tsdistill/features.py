"""Ground-truth feature derivation: trend class, noise class, extrema locations.

All classifiers are ratio- or argmax-based, so labels are invariant under
positive affine transforms of the series, and everything here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .errors import ValidationError
from .ou import TimeSeries

__all__ = [
    "Trend",
    "Noise",
    "Location",
    "FeatureLabels",
    "OracleConfig",
    "default_window",
    "smooth",
    "classify_trend",
    "classify_noise",
    "noise_ratio",
    "locate_extrema",
    "compute_labels",
    "fact_sentence",
    "fact_sentences",
]

SeriesLike = Union[TimeSeries, np.ndarray, list, tuple]

# Classification constants. The noise thresholds apply to the ratio of
# residual standard deviation to series range, which keeps them invariant
# to rescaling; flat_threshold applies to net smoothed change over range.
FLAT_THRESHOLD = 0.3
NOISE_LOW = 0.05
NOISE_HIGH = 0.15


class Trend(str, Enum):
    INCREASING = "increasing"
    FLAT = "flat"
    DECREASING = "decreasing"


class Noise(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class Location(str, Enum):
    BEGINNING = "beginning"
    MIDDLE = "middle"
    END = "end"


@dataclass(frozen=True)
class FeatureLabels:
    trend: Trend
    noise: Noise
    max_loc: Location
    min_loc: Location
    max_index: int
    min_index: int


@dataclass(frozen=True)
class OracleConfig:
    """Constants controlling the feature oracle; recorded in dataset manifests.

    ``window=None`` selects the length-dependent default window.
    """

    window: int | None = None
    flat_threshold: float = FLAT_THRESHOLD
    noise_low: float = NOISE_LOW
    noise_high: float = NOISE_HIGH

    def __post_init__(self):
        if self.window is not None:
            _check_window(self.window)
        if not 0.0 < self.flat_threshold < 1.0:
            raise ValidationError(f"flat_threshold must be in (0, 1), got {self.flat_threshold}")
        if not 0.0 < self.noise_low < self.noise_high:
            raise ValidationError(
                f"noise thresholds must satisfy 0 < low < high, got {self.noise_low}, {self.noise_high}"
            )


def _values(series: SeriesLike) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"series must be one-dimensional, got shape {arr.shape}")
    return arr


def _check_window(window) -> None:
    if not isinstance(window, int) or window < 1 or window % 2 == 0:
        raise ValidationError(f"window must be a positive odd integer, got {window}")


def default_window(n_points: int) -> int:
    """Smoothing window for a series of ``n_points``: max(5, n/10), odd, <= n."""
    w = max(5, round(n_points / 10))
    if w % 2 == 0:
        w += 1
    if w > n_points:
        w = n_points if n_points % 2 == 1 else n_points - 1
    return max(w, 1)


def _resolve_window(n_points: int, window: int | None) -> int:
    if window is None:
        return default_window(n_points)
    _check_window(window)
    if window > n_points:
        raise ValidationError(f"window {window} exceeds series length {n_points}")
    return window


def smooth(series: SeriesLike, window: int) -> np.ndarray:
    """Centered moving average; edge windows truncate to available points."""
    v = _values(series)
    _check_window(window)
    n = len(v)
    if window > n:
        raise ValidationError(f"window {window} exceeds series length {n}")
    half = window // 2
    cum = np.concatenate(([0.0], np.cumsum(v)))
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    return (cum[hi] - cum[lo]) / (hi - lo)


def classify_trend(
    series: SeriesLike,
    window: int | None = None,
    flat_threshold: float = FLAT_THRESHOLD,
) -> Trend:
    """Net change of the smoothed series relative to the raw range."""
    v = _values(series)
    if len(v) < 2:
        raise ValidationError(f"series must have at least 2 points, got {len(v)}")
    span = float(v.max() - v.min())
    if span == 0.0:
        return Trend.FLAT
    s = smooth(v, _resolve_window(len(v), window))
    delta = float(s[-1] - s[0])
    if abs(delta) / span < flat_threshold:
        return Trend.FLAT
    return Trend.INCREASING if delta > 0 else Trend.DECREASING


def noise_ratio(series: SeriesLike, window: int | None = None) -> float:
    """Std of residuals around the smoothed series, divided by the range.

    Only full-window residuals enter the stddev: the truncated edge windows
    are asymmetric, so a steep but noise-free start would otherwise leave
    large structural residuals and read as noise.
    """
    v = _values(series)
    if len(v) < 3:
        raise ValidationError(f"series must have at least 3 points, got {len(v)}")
    span = float(v.max() - v.min())
    if span == 0.0:
        return 0.0
    w = _resolve_window(len(v), window)
    resid = v - smooth(v, w)
    half = w // 2
    interior = resid[half : len(v) - half]
    return float(interior.std() / span)


def classify_noise(
    series: SeriesLike,
    window: int | None = None,
    low: float = NOISE_LOW,
    high: float = NOISE_HIGH,
) -> Noise:
    """Boundary values belong to the upper class (ratio 0.05 reads medium)."""
    rho = noise_ratio(series, window)
    if rho < low:
        return Noise.LOW
    if rho < high:
        return Noise.MEDIUM
    return Noise.HIGH


def _thirds(index: int, n_points: int) -> Location:
    # Half-open thirds: [0, n/3) beginning, [n/3, 2n/3) middle, [2n/3, n) end.
    if index < n_points / 3:
        return Location.BEGINNING
    if index >= 2 * n_points / 3:
        return Location.END
    return Location.MIDDLE


def locate_extrema(series: SeriesLike) -> tuple[Location, Location, int, int]:
    """First-occurrence global extrema and their thirds-rule locations."""
    v = _values(series)
    n = len(v)
    if n < 3:
        raise ValidationError(f"series must have at least 3 points, got {n}")
    max_index = int(np.argmax(v))
    min_index = int(np.argmin(v))
    return _thirds(max_index, n), _thirds(min_index, n), max_index, min_index


def compute_labels(series: SeriesLike, config: OracleConfig | None = None) -> FeatureLabels:
    cfg = config or OracleConfig()
    max_loc, min_loc, max_index, min_index = locate_extrema(series)
    return FeatureLabels(
        trend=classify_trend(series, cfg.window, cfg.flat_threshold),
        noise=classify_noise(series, cfg.window, cfg.noise_low, cfg.noise_high),
        max_loc=max_loc,
        min_loc=min_loc,
        max_index=max_index,
        min_index=min_index,
    )


_TREND_TEMPLATE = "The time series shows an overall {trend} trend."
_NOISE_TEMPLATE = "The noise intensity is {noise}."
_EXTREMA_TEMPLATE = (
    "The maximum occurs around the {max_loc} of the time series, "
    "and the minimum occurs around the {min_loc} of the time series."
)


def fact_sentence(field: str, labels: FeatureLabels) -> str:
    """Render the fact-based reference sentence for one field."""
    if field == "trend":
        return _TREND_TEMPLATE.format(trend=labels.trend.value)
    if field == "noise":
        return _NOISE_TEMPLATE.format(noise=labels.noise.value)
    if field == "extrema":
        return _EXTREMA_TEMPLATE.format(max_loc=labels.max_loc.value, min_loc=labels.min_loc.value)
    raise ValidationError(f"unknown field: {field!r}")


def fact_sentences(labels: FeatureLabels) -> dict[str, str]:
    return {field: fact_sentence(field, labels) for field in ("trend", "noise", "extrema")}
