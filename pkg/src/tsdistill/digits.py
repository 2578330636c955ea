"""Two-digit projection and per-digit serialization of series values.

Values are min-max rescaled per series onto integers 00..99 and written
digit by digit with single spaces so that tokenizers emit one token per
digit: [7, 42] -> "0 7 , 4 2". Rounding is half-away-from-zero so output
does not depend on platform rounding modes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParseError, ValidationError
from .features import SeriesLike, _values

__all__ = ["RescaledSeries", "rescale_to_integers", "serialize_digits", "parse_digits"]


@dataclass(frozen=True)
class RescaledSeries:
    ints: tuple[int, ...]
    source_min: float
    source_max: float

    def __post_init__(self):
        if not self.ints:
            raise ValidationError("rescaled series must be non-empty")
        bad = [i for i in self.ints if not 0 <= i <= 99]
        if bad:
            raise ValidationError(f"rescaled values must be in [0, 99], got {bad[:3]}")


def rescale_to_integers(series: SeriesLike) -> RescaledSeries:
    """Map x to round(99 * (x - min) / (max - min)); constant series map to 50.

    Values strictly inside the range that rounding would collide into the
    0 or 99 bucket are nudged one step inward (to 1 or 98). Only the true
    extrema (and exact ties, which keep their original order) occupy the
    endpoints, so first-occurrence argmax/argmin indices survive rescaling
    and the mapping stays monotone in the source values.
    """
    v = _values(series)
    if len(v) == 0:
        raise ValidationError("series must be non-empty")
    if not np.all(np.isfinite(v)):
        idx = int(np.flatnonzero(~np.isfinite(v))[0])
        raise DataError(f"non-finite value at index {idx}")
    source_min = float(v.min())
    source_max = float(v.max())
    if source_max == source_min:
        ints = (50,) * len(v)
    else:
        scaled = 99.0 * (v - source_min) / (source_max - source_min)
        # half-away-from-zero; scaled is non-negative so floor(x + 0.5) suffices
        rounded = np.floor(scaled + 0.5).astype(int)
        rounded[(rounded == 99) & (v < source_max)] = 98
        rounded[(rounded == 0) & (v > source_min)] = 1
        ints = tuple(int(i) for i in rounded)
    return RescaledSeries(ints=ints, source_min=source_min, source_max=source_max)


def serialize_digits(rescaled: RescaledSeries | tuple[int, ...] | list[int]) -> str:
    """Two zero-padded digits per value, digits space-separated, values " , "-separated."""
    ints = rescaled.ints if isinstance(rescaled, RescaledSeries) else tuple(rescaled)
    if not ints:
        raise ValidationError("nothing to serialize")
    if any(not 0 <= i <= 99 for i in ints):
        raise ValidationError("values must be integers in [0, 99]")
    return " , ".join(f"{i // 10} {i % 10}" for i in ints)


def parse_digits(text: str) -> tuple[int, ...]:
    """Exact inverse of :func:`serialize_digits` on its image."""
    ints: list[int] = []
    pos = 0
    n = len(text)
    while True:
        if pos >= n or not text[pos].isdigit():
            raise ParseError("expected digit", offset=pos)
        if pos + 1 >= n or text[pos + 1] != " ":
            raise ParseError("expected space between digits", offset=pos + 1)
        if pos + 2 >= n or not text[pos + 2].isdigit():
            raise ParseError("expected digit", offset=pos + 2)
        ints.append(int(text[pos]) * 10 + int(text[pos + 2]))
        pos += 3
        if pos == n:
            return tuple(ints)
        for offset, expected in ((pos, " "), (pos + 1, ","), (pos + 2, " ")):
            if offset >= n or text[offset] != expected:
                raise ParseError(f"expected {expected!r} in value separator", offset=offset)
        pos += 3
