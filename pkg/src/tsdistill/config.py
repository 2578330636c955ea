"""Pipeline configuration: one JSON file drives every CLI stage.

Unknown keys are rejected so a typo cannot silently fall back to a
default, and the validated config is echoed into the dataset manifest.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .annotate import AnnotatorConfig
from .errors import ValidationError
from .features import OracleConfig
from .ou import ParamRanges

__all__ = ["PipelineConfig", "load_config"]

SCORER_CHOICES = ("rule", "remote")


@dataclass(frozen=True)
class PipelineConfig:
    dataset_seed: int = 0
    n_samples: int = 200
    train_count: int = 180
    test_count: int = 20
    ranges: ParamRanges = field(default_factory=ParamRanges)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    annotator: AnnotatorConfig = field(default_factory=AnnotatorConfig)
    scorer: str = "rule"
    scorer_url: str | None = None
    output_dir: str = "dataset"

    def __post_init__(self):
        if not isinstance(self.dataset_seed, int) or self.dataset_seed < 0:
            raise ValidationError(f"dataset_seed must be a non-negative integer, got {self.dataset_seed}")
        if not 1 <= self.n_samples <= 9999:
            raise ValidationError(f"n_samples must be in [1, 9999], got {self.n_samples}")
        if self.train_count < 0 or self.test_count < 0:
            raise ValidationError("split counts must be non-negative")
        if self.train_count + self.test_count != self.n_samples:
            raise ValidationError(
                f"split counts must sum to n_samples: {self.train_count} + {self.test_count} "
                f"!= {self.n_samples}"
            )
        if self.scorer not in SCORER_CHOICES:
            raise ValidationError(f"scorer must be one of {SCORER_CHOICES}, got {self.scorer!r}")
        if self.scorer == "remote" and not self.scorer_url:
            raise ValidationError("scorer_url must be set when scorer is 'remote'")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["ranges"]["kappa_range"] = list(self.ranges.kappa_range)
        data["ranges"]["r_bar_range"] = list(self.ranges.r_bar_range)
        data["ranges"]["sigma_range"] = list(self.ranges.sigma_range)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        if not isinstance(data, dict):
            raise ValidationError(f"config must be a JSON object, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown config key: {unknown[0]}")
        kwargs = dict(data)
        for key, target in (("ranges", ParamRanges), ("oracle", OracleConfig), ("annotator", AnnotatorConfig)):
            if key in kwargs:
                kwargs[key] = _nested(target, kwargs[key], key)
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ValidationError(f"invalid config: {exc}") from exc


def _nested(target, data, key):
    if isinstance(data, target):
        return data
    if not isinstance(data, dict):
        raise ValidationError(f"config key {key!r} must be an object")
    known = {f.name for f in fields(target)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValidationError(f"unknown config key: {key}.{unknown[0]}")
    kwargs = dict(data)
    for range_key in ("kappa_range", "r_bar_range", "sigma_range"):
        if range_key in kwargs and isinstance(kwargs[range_key], list):
            kwargs[range_key] = tuple(kwargs[range_key])
    return target(**kwargs)


def load_config(path: str | Path | None) -> PipelineConfig:
    """Load a config file, or the defaults when no path is given."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}") from exc
    return PipelineConfig.from_dict(data)
