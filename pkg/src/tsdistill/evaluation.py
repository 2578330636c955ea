"""Scoring of candidate annotations against test-set references.

Three metric families: paragraph cosine similarity (needs an embedding
backend), per-sentence NLI scores against the reference annotation, and
feature-based scores against fact sentences derived from the series
itself. NLI-style scores always live in {0, 0.5, 1}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotate import ANNOTATION_FIELDS, Annotation, parse_annotation_json
from .errors import AnnotationFormatError, DataError, ValidationError
from .features import FeatureLabels, fact_sentence
from .scorers import nli_compare

__all__ = [
    "CandidateOutput",
    "EvalReport",
    "cosine_score",
    "nli_field_score",
    "feature_field_score",
    "evaluate",
    "emit_report",
    "load_candidates",
]

MODES = ("strict", "freetext")

_METRIC_ROWS = (
    ("cosine", "Cosine"),
    ("nli_trend", 'NLI "trend"'),
    ("nli_noise", 'NLI "noise"'),
    ("nli_extrema", 'NLI "extrema"'),
    ("feature_trend", 'Feature "trend"'),
    ("feature_noise", 'Feature "noise"'),
    ("feature_extrema", 'Feature "extrema"'),
)


@dataclass(frozen=True)
class CandidateOutput:
    """One model output for one test sample, parsed as far as possible."""

    sample_id: str
    raw_text: str | None = None
    field_texts: dict[str, str] | None = None
    annotation: Annotation | None = None
    parse_error: str | None = None

    def sentences(self) -> dict[str, str] | None:
        if self.annotation is not None:
            return {f: self.annotation.sentence(f) for f in ANNOTATION_FIELDS}
        return self.field_texts

    def paragraph(self) -> str | None:
        sentences = self.sentences()
        if sentences is None:
            return None
        return " ".join(sentences[f] for f in ANNOTATION_FIELDS)


@dataclass
class EvalReport:
    """Per-metric means over a test split, plus per-sample detail rows."""

    cosine_mean: float | None
    nli_trend: float
    nli_noise: float
    nli_extrema: float
    feature_trend: float
    feature_noise: float
    feature_extrema: float
    n_samples: int
    parse_failures: int
    mode: str
    scorer: str
    per_sample: list[dict] = field(default_factory=list)

    def metric(self, key: str) -> float | None:
        return getattr(self, "cosine_mean" if key == "cosine" else key)

    def to_dict(self) -> dict:
        return {
            "cosine_mean": self.cosine_mean,
            "nli_trend": self.nli_trend,
            "nli_noise": self.nli_noise,
            "nli_extrema": self.nli_extrema,
            "feature_trend": self.feature_trend,
            "feature_noise": self.feature_noise,
            "feature_extrema": self.feature_extrema,
            "n_samples": self.n_samples,
            "parse_failures": self.parse_failures,
            "mode": self.mode,
            "scorer": self.scorer,
            "per_sample": [dict(row) for row in self.per_sample],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            cosine_mean=data["cosine_mean"],
            nli_trend=data["nli_trend"],
            nli_noise=data["nli_noise"],
            nli_extrema=data["nli_extrema"],
            feature_trend=data["feature_trend"],
            feature_noise=data["feature_noise"],
            feature_extrema=data["feature_extrema"],
            n_samples=data["n_samples"],
            parse_failures=data["parse_failures"],
            mode=data["mode"],
            scorer=data["scorer"],
            per_sample=[dict(row) for row in data.get("per_sample", [])],
        )

    def to_text(self) -> str:
        width = max(len(label) for _, label in _METRIC_ROWS)
        lines = []
        for key, label in _METRIC_ROWS:
            value = self.metric(key)
            rendered = "n/a" if value is None else f"{value:.4f}"
            lines.append(f"{label:<{width}}  {rendered}")
        lines.append(f"{'n_samples':<{width}}  {self.n_samples}")
        lines.append(f"{'parse_failures':<{width}}  {self.parse_failures}")
        return "\n".join(lines) + "\n"


def cosine_score(reference_paragraph: str, candidate_paragraph: str, embedder) -> float:
    """Cosine of the two paragraph embeddings."""
    vectors = embedder.embed([reference_paragraph, candidate_paragraph])
    v, w = np.asarray(vectors[0], dtype=float), np.asarray(vectors[1], dtype=float)
    denom = float(np.linalg.norm(v) * np.linalg.norm(w))
    if denom == 0.0:
        return 0.0
    return float(np.dot(v, w) / denom)


def nli_field_score(reference_sentence: str, candidate_sentence: str, scorer, field: str | None = None) -> float:
    """Verdict mapped through the fixed table: entailment 1, neutral 0.5, contradiction 0."""
    return nli_compare(reference_sentence, candidate_sentence, scorer, field=field).score


def feature_field_score(candidate_sentence: str, labels: FeatureLabels, field: str, scorer) -> float:
    """Score a candidate sentence against the fact sentence rendered from labels."""
    return nli_field_score(fact_sentence(field, labels), candidate_sentence, scorer, field=field)


def load_candidates(path: str | Path, mode: str) -> list[CandidateOutput]:
    """Read a candidates JSONL file in strict or freetext layout."""
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    expected = {"id", "text"} if mode == "strict" else {"id", "trend_text", "noise_text", "extrema_text"}
    candidates = []
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"candidates file not found: {path}")
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(record, dict) or set(record) != expected:
            raise DataError(
                f"{path}:{lineno}: expected keys {sorted(expected)}, got "
                f"{sorted(record) if isinstance(record, dict) else type(record).__name__}"
            )
        if mode == "strict":
            try:
                annotation = parse_annotation_json(record["text"])
                candidates.append(
                    CandidateOutput(sample_id=record["id"], raw_text=record["text"], annotation=annotation)
                )
            except AnnotationFormatError as exc:
                candidates.append(
                    CandidateOutput(sample_id=record["id"], raw_text=record["text"], parse_error=str(exc))
                )
        else:
            texts = {f: record[f"{f}_text"] for f in ANNOTATION_FIELDS}
            if any(not isinstance(t, str) or not t.strip() for t in texts.values()):
                raise DataError(f"{path}:{lineno}: candidate texts must be non-empty strings")
            candidates.append(CandidateOutput(sample_id=record["id"], field_texts=texts))
    return candidates


def evaluate(
    test_samples: list,
    candidates: list[CandidateOutput],
    scorer,
    embedder=None,
    mode: str = "strict",
) -> EvalReport:
    """Score candidates against the test split.

    ``test_samples`` must expose id, annotation, and labels (the dataset
    Sample type or anything shaped like it). Candidate ids must match the
    test split exactly. In strict mode a candidate that failed to parse
    scores 0 on every metric and is counted in ``parse_failures``.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    if not test_samples:
        raise ValidationError("test set is empty")
    by_id = {s.id: s for s in test_samples}
    candidate_ids = [c.sample_id for c in candidates]
    if len(set(candidate_ids)) != len(candidate_ids):
        dupes = sorted({i for i in candidate_ids if candidate_ids.count(i) > 1})
        raise ValidationError(f"duplicate candidate ids: {dupes}")
    unknown = sorted(set(candidate_ids) - set(by_id))
    if unknown:
        raise ValidationError(f"candidate ids not in the test set: {unknown}")
    missing = sorted(set(by_id) - set(candidate_ids))
    if missing:
        raise ValidationError(f"missing candidates for test ids: {missing}")

    rows = []
    parse_failures = 0
    for candidate in sorted(candidates, key=lambda c: c.sample_id):
        sample = by_id[candidate.sample_id]
        reference: Annotation = sample.annotation
        labels: FeatureLabels = sample.labels
        sentences = candidate.sentences()
        row: dict = {"id": candidate.sample_id, "parse_ok": sentences is not None}
        if sentences is None:
            parse_failures += 1
            row.update(
                cosine=0.0 if embedder is not None else None,
                nli_trend=0.0, nli_noise=0.0, nli_extrema=0.0,
                feature_trend=0.0, feature_noise=0.0, feature_extrema=0.0,
            )
            rows.append(row)
            continue
        for f in ANNOTATION_FIELDS:
            row[f"nli_{f}"] = nli_field_score(reference.sentence(f), sentences[f], scorer, field=f)
            row[f"feature_{f}"] = feature_field_score(sentences[f], labels, f, scorer)
        row["cosine"] = (
            cosine_score(reference.paragraph(), candidate.paragraph(), embedder)
            if embedder is not None
            else None
        )
        rows.append(row)

    def _mean(key: str) -> float:
        return float(np.mean([row[key] for row in rows]))

    return EvalReport(
        cosine_mean=_mean("cosine") if embedder is not None else None,
        nli_trend=_mean("nli_trend"),
        nli_noise=_mean("nli_noise"),
        nli_extrema=_mean("nli_extrema"),
        feature_trend=_mean("feature_trend"),
        feature_noise=_mean("feature_noise"),
        feature_extrema=_mean("feature_extrema"),
        n_samples=len(rows),
        parse_failures=parse_failures,
        mode=mode,
        scorer=getattr(scorer, "name", type(scorer).__name__),
        per_sample=rows,
    )


def emit_report(report: EvalReport, out_dir: str | Path) -> tuple[Path, Path]:
    """Write report.json and the aligned report.txt table; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    text_path = out_dir / "report.txt"
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    text_path.write_text(report.to_text())
    return json_path, text_path
