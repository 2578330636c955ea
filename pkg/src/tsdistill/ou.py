"""Mean-reverting series generator.

Simulates the discrete mean-reverting recursion

    r_t = r_{t-1} + kappa * (r_bar - r_{t-1}) + u_t,    r_0 = 0,

with u_t ~ N(0, sigma^2). This is an AR(1) process with coefficient
a = 1 - kappa, so closed-form moments exist and are exposed through
:func:`theoretical_moments` for use as a simulation oracle.

Randomness discipline: every stream is a counter-based Philox generator
keyed through ``numpy.random.SeedSequence``, so a series is a pure
function of its parameters (seed included) and independent streams can
be derived per sample without ordering dependencies. Gaussian draws use
``Generator.standard_normal`` (numpy's ziggurat), which is stable for a
fixed numpy version, and are scaled by sigma afterwards so that sharing
a seed across sigma values reuses the same underlying normals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "OuParams",
    "ParamRanges",
    "TimeSeries",
    "generate_series",
    "sample_params",
    "theoretical_moments",
]

_MAX_SEED = 2**64


def _philox(key) -> np.random.Generator:
    """Philox generator keyed by an int or tuple of ints."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


@dataclass(frozen=True)
class OuParams:
    """Parameter tuple fully determining one trajectory."""

    kappa: float
    r_bar: float
    sigma: float
    n_steps: int = 100
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.kappa <= 1.0:
            raise ValidationError(f"kappa must be in (0, 1], got {self.kappa}")
        if not np.isfinite(self.r_bar):
            raise ValidationError(f"r_bar must be finite, got {self.r_bar}")
        if not self.sigma >= 0.0:
            raise ValidationError(f"sigma must be >= 0, got {self.sigma}")
        if not isinstance(self.n_steps, int) or self.n_steps < 2:
            raise ValidationError(f"n_steps must be an integer >= 2, got {self.n_steps}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < _MAX_SEED:
            raise ValidationError(f"seed must be an integer in [0, 2^64), got {self.seed}")


@dataclass(frozen=True)
class ParamRanges:
    """Closed intervals that :func:`sample_params` draws from uniformly."""

    kappa_range: tuple[float, float] = (0.01, 0.5)
    r_bar_range: tuple[float, float] = (-50.0, 50.0)
    sigma_range: tuple[float, float] = (0.5, 10.0)
    n_steps: int = 100

    def __post_init__(self):
        for name, (lo, hi) in (
            ("kappa_range", self.kappa_range),
            ("r_bar_range", self.r_bar_range),
            ("sigma_range", self.sigma_range),
        ):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ValidationError(f"{name} must be a nonempty finite interval, got [{lo}, {hi}]")
        klo, khi = self.kappa_range
        if not (0.0 < klo and khi <= 1.0):
            raise ValidationError(f"kappa_range must lie within (0, 1], got {self.kappa_range}")
        if self.sigma_range[0] < 0.0:
            raise ValidationError(f"sigma_range must be non-negative, got {self.sigma_range}")
        if not isinstance(self.n_steps, int) or self.n_steps < 2:
            raise ValidationError(f"n_steps must be an integer >= 2, got {self.n_steps}")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A trajectory plus the parameters that produced it.

    ``values`` has length ``params.n_steps + 1`` and starts at 0.
    """

    values: np.ndarray
    params: OuParams

    def __post_init__(self):
        if len(self.values) != self.params.n_steps + 1:
            raise ValidationError(
                f"values must have length n_steps + 1 = {self.params.n_steps + 1}, "
                f"got {len(self.values)}"
            )
        if self.values[0] != 0.0:
            raise ValidationError(f"values[0] must be 0, got {self.values[0]}")

    @property
    def n_points(self) -> int:
        return len(self.values)


def generate_series(params: OuParams) -> TimeSeries:
    """Simulate the recursion; identical params give bit-identical output."""
    rng = _philox(params.seed)
    noise = (params.sigma * rng.standard_normal(params.n_steps)).tolist()
    values = np.empty(params.n_steps + 1)
    v = 0.0
    values[0] = v
    kappa, r_bar = params.kappa, params.r_bar
    for t in range(params.n_steps):
        v = v + kappa * (r_bar - v) + noise[t]
        values[t + 1] = v
    values.setflags(write=False)
    return TimeSeries(values=values, params=params)


def sample_params(ranges: ParamRanges, seed: int) -> OuParams:
    """Draw (kappa, r_bar, sigma) uniformly from ``ranges``.

    The draw order is fixed (kappa, r_bar, sigma, then a 64-bit series
    seed) so results are deterministic per (ranges, seed).
    """
    if not isinstance(seed, int) or not 0 <= seed < _MAX_SEED:
        raise ValidationError(f"seed must be an integer in [0, 2^64), got {seed}")
    rng = _philox(seed)
    kappa = float(rng.uniform(*ranges.kappa_range))
    r_bar = float(rng.uniform(*ranges.r_bar_range))
    sigma = float(rng.uniform(*ranges.sigma_range))
    series_seed = int(rng.integers(0, _MAX_SEED, dtype=np.uint64))
    return OuParams(kappa=kappa, r_bar=r_bar, sigma=sigma, n_steps=ranges.n_steps, seed=series_seed)


def theoretical_moments(params: OuParams, t: int) -> tuple[float, float]:
    """Exact mean and variance of r_t implied by the AR(1) recursion.

    With a = 1 - kappa and r_0 = 0:

        E[r_t]   = r_bar * (1 - a^t)
        Var[r_t] = sigma^2 * (1 - a^(2t)) / (1 - a^2)

    The variance expression is the partial geometric sum
    sigma^2 * (1 + a^2 + ... + a^(2(t-1))), valid for all kappa in (0, 1].
    """
    if not isinstance(t, int) or not 0 <= t <= params.n_steps:
        raise ValidationError(f"t must be an integer in [0, n_steps], got {t}")
    if t == 0:
        return 0.0, 0.0
    a = 1.0 - params.kappa
    mean = params.r_bar * (1.0 - a**t)
    variance = params.sigma**2 * (1.0 - a ** (2 * t)) / (1.0 - a * a)
    return float(mean), float(variance)
