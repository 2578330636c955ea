"""Dataset orchestration: generate, render, annotate, fact-check, split, export.

Build layout under the output directory:

    manifest.json        reproducibility record (config echo, split, constants)
    parts/<id>.json      one self-hashed record per sample (resume unit)
    images/<id>.png      rendered line plots
    factcheck.json       agreement report
    samples.jsonl        full sample records, one per line
    sft_train.jsonl      prompt/completion records for the train split
    sft_test.jsonl       prompt/completion records for the test split

In mock mode the whole build is a pure function of the config, so two
builds of the same config produce byte-identical JSONL, and a resumed
build converges to the same bytes as an uninterrupted one.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .annotate import (
    Annotation,
    AnnotationClient,
    AnnotationSource,
    build_prompt,
    mock_annotate,
)
from .config import PipelineConfig
from .digits import RescaledSeries, rescale_to_integers, serialize_digits
from .errors import DataError, PipelineError, ValidationError
from .factcheck import FactCheckReport, fact_check_sample
from .features import FeatureLabels, Location, Noise, Trend, compute_labels, default_window
from .ou import OuParams, TimeSeries, generate_series, sample_params
from .plotting import render_plot
from .scorers import NLILabel, RemoteScorer, RuleBasedScorer

__all__ = ["Sample", "DatasetManifest", "DatasetBuilder", "BuildError", "export_sft", "load_samples"]

log = logging.getLogger(__name__)

# Sub-stream tags for per-sample seed derivation from (dataset_seed, index).
_PARAMS_STREAM = 0
_SPLIT_STREAM = 1


class BuildError(PipelineError):
    """Build aborted; completed parts stay on disk so the build can resume."""

    def __init__(self, message: str, completed: int, total: int, cause: Exception | None = None):
        super().__init__(f"{message} ({completed}/{total} samples completed; rerun to resume)")
        self.completed = completed
        self.total = total
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)


@dataclass
class Sample:
    id: str
    params: OuParams
    series: TimeSeries
    rescaled: RescaledSeries
    image_path: str
    labels: FeatureLabels
    annotation: Annotation | None = None
    split: str | None = None
    fact_check: dict | None = None

    def to_record(self) -> dict:
        record = {
            "id": self.id,
            "split": self.split,
            "params": {
                "kappa": self.params.kappa,
                "r_bar": self.params.r_bar,
                "sigma": self.params.sigma,
                "n_steps": self.params.n_steps,
                "seed": self.params.seed,
            },
            "values": [float(v) for v in self.series.values],
            "rescaled": {
                "ints": list(self.rescaled.ints),
                "source_min": self.rescaled.source_min,
                "source_max": self.rescaled.source_max,
            },
            "image": self.image_path,
            "labels": {
                "trend": self.labels.trend.value,
                "noise": self.labels.noise.value,
                "max_loc": self.labels.max_loc.value,
                "min_loc": self.labels.min_loc.value,
                "max_index": self.labels.max_index,
                "min_index": self.labels.min_index,
            },
            "annotation": None
            if self.annotation is None
            else {
                "trend_sentence": self.annotation.trend_sentence,
                "noise_sentence": self.annotation.noise_sentence,
                "extrema_sentence": self.annotation.extrema_sentence,
                "source": self.annotation.source.value,
            },
        }
        return record

    @classmethod
    def from_record(cls, record: dict) -> "Sample":
        params = OuParams(**record["params"])
        series = TimeSeries(values=np.asarray(record["values"], dtype=float), params=params)
        rescaled = RescaledSeries(
            ints=tuple(record["rescaled"]["ints"]),
            source_min=record["rescaled"]["source_min"],
            source_max=record["rescaled"]["source_max"],
        )
        labels = FeatureLabels(
            trend=Trend(record["labels"]["trend"]),
            noise=Noise(record["labels"]["noise"]),
            max_loc=Location(record["labels"]["max_loc"]),
            min_loc=Location(record["labels"]["min_loc"]),
            max_index=record["labels"]["max_index"],
            min_index=record["labels"]["min_index"],
        )
        annotation = None
        if record.get("annotation") is not None:
            ann = record["annotation"]
            annotation = Annotation(
                trend_sentence=ann["trend_sentence"],
                noise_sentence=ann["noise_sentence"],
                extrema_sentence=ann["extrema_sentence"],
                source=AnnotationSource(ann["source"]),
            )
        return cls(
            id=record["id"],
            params=params,
            series=series,
            rescaled=rescaled,
            image_path=record["image"],
            labels=labels,
            annotation=annotation,
            split=record.get("split"),
            fact_check=record.get("fact_check"),
        )


@dataclass
class DatasetManifest:
    config: dict
    split: dict[str, list[str]]
    oracle_window: int
    prompt_sha256: str
    annotator_mode: str
    tool_version: str
    status: str

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "split": self.split,
            "oracle_window": self.oracle_window,
            "prompt_sha256": self.prompt_sha256,
            "annotator_mode": self.annotator_mode,
            "tool_version": self.tool_version,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetManifest":
        return cls(**data)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _record_hash(record: dict) -> str:
    body = {k: v for k, v in record.items() if k != "content_hash"}
    return hashlib.sha256(_dumps(body).encode()).hexdigest()


def sample_id(index: int) -> str:
    return f"s{index:04d}"


def _sample_seed(dataset_seed: int, index: int) -> int:
    seq = np.random.SeedSequence((dataset_seed, index, _PARAMS_STREAM))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _split_ids(config: PipelineConfig) -> dict[str, list[str]]:
    ids = [sample_id(i) for i in range(config.n_samples)]
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence((config.dataset_seed, _SPLIT_STREAM)))
    )
    order = rng.permutation(config.n_samples)
    train = sorted(ids[i] for i in order[: config.train_count])
    test = sorted(ids[i] for i in order[config.train_count :])
    return {"train": train, "test": test}


def export_sft(samples: list[Sample], path: str | Path) -> Path:
    """Write prompt/completion JSONL for the given samples (numeric input only)."""
    path = Path(path)
    prompt_text = build_prompt()
    lines = []
    for sample in sorted(samples, key=lambda s: s.id):
        if sample.annotation is None:
            raise ValidationError(f"sample {sample.id} has no annotation; run the annotate stage")
        prompt = f"{prompt_text}\n\n{serialize_digits(sample.rescaled)}"
        lines.append(
            _dumps(
                {
                    "id": sample.id,
                    "split": sample.split,
                    "prompt": prompt,
                    "completion": sample.annotation.pattern_json(),
                }
            )
        )
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return path


def load_samples(dataset_dir: str | Path) -> list[Sample]:
    """Read samples.jsonl from a completed build."""
    path = Path(dataset_dir) / "samples.jsonl"
    if not path.is_file():
        raise ValidationError(f"no samples.jsonl under {dataset_dir}; run the build first")
    samples = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            samples.append(Sample.from_record(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise DataError(f"{path}:{lineno}: malformed sample record: {exc}") from exc
    return samples


class DatasetBuilder:
    """Stage runner over one output directory; every stage is resumable."""

    def __init__(
        self,
        config: PipelineConfig,
        out_dir: str | Path | None = None,
        mock: bool = False,
        jobs: int = 4,
        force: bool = False,
    ):
        self.config = config
        self.out_dir = Path(out_dir if out_dir is not None else config.output_dir)
        self.mock = mock
        self.jobs = max(1, jobs)
        self.force = force
        self.parts_dir = self.out_dir / "parts"
        self.images_dir = self.out_dir / "images"
        self.manifest_path = self.out_dir / "manifest.json"

    # -- manifest ----------------------------------------------------------

    def _annotator_mode(self) -> str:
        # Derived from what is actually on disk: oracle annotations mean a
        # mock build, anything llm/replaced means a live annotator.
        sources = set()
        if self.parts_dir.is_dir():
            for index in range(self.config.n_samples):
                sample = self._read_part(sample_id(index))
                if sample is not None and sample.annotation is not None:
                    sources.add(sample.annotation.source)
        if not sources:
            return "pending"
        if sources == {AnnotationSource.ORACLE}:
            return "mock"
        return "llm"

    def _manifest(self, status: str) -> DatasetManifest:
        return DatasetManifest(
            config=self.config.to_dict(),
            split=_split_ids(self.config),
            oracle_window=self.config.oracle.window
            or default_window(self.config.ranges.n_steps + 1),
            prompt_sha256=hashlib.sha256(build_prompt().encode()).hexdigest(),
            annotator_mode=self._annotator_mode(),
            tool_version=__version__,
            status=status,
        )

    def _write_manifest(self, status: str) -> DatasetManifest:
        manifest = self._manifest(status)
        self.manifest_path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
        return manifest

    def _check_existing_manifest(self) -> None:
        if not self.manifest_path.is_file():
            return
        if self.force:
            return
        existing = json.loads(self.manifest_path.read_text())
        diffs = _config_diff(existing.get("config", {}), self.config.to_dict())
        if diffs:
            raise ValidationError(
                "existing dataset was built with a different config; "
                "use --force to rebuild. Differences: " + "; ".join(diffs)
            )

    # -- parts -------------------------------------------------------------

    def _part_path(self, sid: str) -> Path:
        return self.parts_dir / f"{sid}.json"

    def _write_part(self, sample: Sample) -> None:
        record = sample.to_record()
        record["fact_check"] = sample.fact_check
        record["content_hash"] = _record_hash(record)
        self._part_path(sample.id).write_text(_dumps(record) + "\n")

    def _read_part(self, sid: str) -> Sample | None:
        path = self._part_path(sid)
        if not path.is_file():
            return None
        try:
            record = json.loads(path.read_text())
        except json.JSONDecodeError:
            return None
        if record.get("content_hash") != _record_hash(record):
            log.warning("part %s failed its content hash; rebuilding", sid)
            return None
        try:
            return Sample.from_record(record)
        except (KeyError, ValueError, PipelineError):
            log.warning("part %s is malformed; rebuilding", sid)
            return None

    # -- stages ------------------------------------------------------------

    def _make_sample(self, index: int, split_of: dict[str, str]) -> Sample:
        sid = sample_id(index)
        params = sample_params(self.config.ranges, _sample_seed(self.config.dataset_seed, index))
        series = generate_series(params)
        labels = compute_labels(series, self.config.oracle)
        rescaled = rescale_to_integers(series)
        image_rel = f"images/{sid}.png"
        render_plot(series, self.out_dir / image_rel)
        return Sample(
            id=sid,
            params=params,
            series=series,
            rescaled=rescaled,
            image_path=image_rel,
            labels=labels,
            split=split_of[sid],
        )

    def generate(self) -> DatasetManifest:
        """Create parts with series, labels, digits, and plots (no annotations)."""
        self._check_existing_manifest()
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.parts_dir.mkdir(exist_ok=True)
        self.images_dir.mkdir(exist_ok=True)
        manifest = self._write_manifest(status="generated")
        split_of = {sid: name for name, ids in manifest.split.items() for sid in ids}
        for index in range(self.config.n_samples):
            sid = sample_id(index)
            existing = self._read_part(sid)
            image_ok = (self.out_dir / f"images/{sid}.png").is_file()
            if existing is not None and image_ok and not self.force:
                continue
            self._write_part(self._make_sample(index, split_of))
        return manifest

    def annotate(self) -> None:
        """Fill annotations for all parts that lack one."""
        samples = self._require_parts(annotated=False)
        todo = [s for s in samples if s.annotation is None or self.force]
        if not todo:
            self._write_manifest(status="annotated")
            return
        done_sources = {s.annotation.source for s in samples if s.annotation is not None}
        if done_sources and not self.force:
            mixing_mock = self.mock and done_sources != {AnnotationSource.ORACLE}
            mixing_llm = not self.mock and AnnotationSource.ORACLE in done_sources
            if mixing_mock or mixing_llm:
                raise ValidationError(
                    "dataset already contains annotations from a different annotator mode; "
                    "use --force to re-annotate"
                )
        if self.mock:
            for sample in todo:
                sample.annotation = mock_annotate(sample.series, self.config.oracle)
                self._write_part(sample)
            self._write_manifest(status="annotated")
            return
        client = AnnotationClient(self.config.annotator)

        def _run(sample: Sample) -> tuple[Sample, Annotation]:
            digits_text = serialize_digits(sample.rescaled)
            return sample, client.annotate(self.out_dir / sample.image_path, digits_text)

        completed = sum(1 for s in samples if s.annotation is not None)
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            futures = [pool.submit(_run, sample) for sample in todo]
            for future in futures:
                try:
                    sample, annotation = future.result()
                except PipelineError as exc:
                    for other in futures:
                        other.cancel()
                    raise BuildError(
                        f"annotation failed: {exc}", completed, len(samples), cause=exc
                    ) from exc
                sample.annotation = annotation
                self._write_part(sample)
                completed += 1
        self._write_manifest(status="annotated")

    def fact_check(self) -> FactCheckReport:
        """Score annotations against fact sentences; replace contradicted extrema."""
        samples = self._require_parts(annotated=True)
        scorer = self._scorer()
        verdicts_by_id: dict[str, dict[str, str]] = {}
        for sample in samples:
            if sample.fact_check is not None and not self.force:
                verdicts_by_id[sample.id] = {
                    f: sample.fact_check[f] for f in ("trend", "noise", "extrema")
                }
                continue
            new_annotation, verdicts = fact_check_sample(sample.annotation, sample.labels, scorer)
            stored = {f: verdicts[f].label.value for f in ("trend", "noise", "extrema")}
            if new_annotation is not sample.annotation:
                stored["replaced_from"] = sample.annotation.extrema_sentence
                sample.annotation = new_annotation
            sample.fact_check = stored
            self._write_part(sample)
            verdicts_by_id[sample.id] = {f: stored[f] for f in ("trend", "noise", "extrema")}
        report = _report_from_stored(verdicts_by_id, getattr(scorer, "name", "rule"))
        (self.out_dir / "factcheck.json").write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
        )
        return report

    def export(self) -> DatasetManifest:
        """Write samples.jsonl and the SFT train/test files; finalize the manifest."""
        samples = self._require_parts(annotated=True)
        lines = [_dumps(s.to_record()) for s in samples]
        (self.out_dir / "samples.jsonl").write_text("\n".join(lines) + "\n")
        export_sft([s for s in samples if s.split == "train"], self.out_dir / "sft_train.jsonl")
        export_sft([s for s in samples if s.split == "test"], self.out_dir / "sft_test.jsonl")
        return self._write_manifest(status="complete")

    def build(self) -> DatasetManifest:
        """Full pipeline; rerunning after an abort completes only missing work."""
        self.generate()
        self.annotate()
        self.fact_check()
        return self.export()

    # resume is build with an existing directory: generate/annotate skip
    # hash-valid parts, fact_check skips stored verdicts, export rewrites.
    resume = build

    # -- helpers -----------------------------------------------------------

    def _scorer(self):
        if self.config.scorer == "remote":
            return RemoteScorer(self.config.scorer_url)
        return RuleBasedScorer()

    def _require_parts(self, annotated: bool) -> list[Sample]:
        if not self.parts_dir.is_dir():
            raise ValidationError(f"no parts under {self.out_dir}; run the generate stage first")
        samples = []
        missing = []
        for index in range(self.config.n_samples):
            sid = sample_id(index)
            sample = self._read_part(sid)
            if sample is None:
                missing.append(sid)
            else:
                samples.append(sample)
        if missing:
            raise ValidationError(
                f"{len(missing)} sample parts missing or invalid (first: {missing[0]}); "
                "run the generate stage"
            )
        if annotated:
            unannotated = [s.id for s in samples if s.annotation is None]
            if unannotated:
                raise ValidationError(
                    f"{len(unannotated)} samples lack annotations (first: {unannotated[0]}); "
                    "run the annotate stage"
                )
        return samples


def _config_diff(old: dict, new: dict, prefix: str = "") -> list[str]:
    diffs = []
    for key in sorted(set(old) | set(new)):
        label = f"{prefix}{key}"
        if key not in old:
            diffs.append(f"{label}: missing != {new[key]!r}")
        elif key not in new:
            diffs.append(f"{label}: {old[key]!r} != missing")
        elif isinstance(old[key], dict) and isinstance(new[key], dict):
            diffs.extend(_config_diff(old[key], new[key], prefix=f"{label}."))
        elif old[key] != new[key]:
            diffs.append(f"{label}: {old[key]!r} != {new[key]!r}")
    return diffs


def _report_from_stored(verdicts_by_id: dict[str, dict[str, str]], scorer_name: str) -> FactCheckReport:
    if not verdicts_by_id:
        raise ValidationError("cannot fact-check an empty dataset")
    n = len(verdicts_by_id)
    contradiction = NLILabel.CONTRADICTION.value
    rates = {
        f: sum(1 for v in verdicts_by_id.values() if v[f] != contradiction) / n
        for f in ("trend", "noise", "extrema")
    }
    replaced = sorted(i for i, v in verdicts_by_id.items() if v["extrema"] == contradiction)
    retained = sorted(
        i
        for i, v in verdicts_by_id.items()
        if v["trend"] == contradiction or v["noise"] == contradiction
    )
    return FactCheckReport(
        rates=rates,
        replaced_ids=replaced,
        retained_ids=retained,
        n_samples=n,
        scorer=scorer_name,
        per_sample={i: dict(v) for i, v in sorted(verdicts_by_id.items())},
    )
