"""NLI comparison of annotations against oracle fact sentences.

A contradicted extrema sentence is replaced by the corresponding fact
sentence (locations are objectively checkable); trend and noise
discrepancies are recorded but kept, since they usually reflect
acceptable ambiguity rather than outright error.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

from .annotate import Annotation, AnnotationSource
from .errors import ValidationError
from .features import FeatureLabels, fact_sentences
from .scorers import FIELDS, NLILabel, NLIVerdict, nli_compare

__all__ = ["FactCheckReport", "fact_check_sample", "agreement_report", "apply_fact_check"]


@dataclass
class FactCheckReport:
    rates: dict[str, float]
    replaced_ids: list[str]
    retained_ids: list[str]
    n_samples: int
    scorer: str
    per_sample: dict[str, dict[str, str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rates": dict(self.rates),
            "replaced_ids": list(self.replaced_ids),
            "retained_ids": list(self.retained_ids),
            "n_samples": self.n_samples,
            "scorer": self.scorer,
            "per_sample": {k: dict(v) for k, v in self.per_sample.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FactCheckReport":
        return cls(
            rates=dict(data["rates"]),
            replaced_ids=list(data["replaced_ids"]),
            retained_ids=list(data["retained_ids"]),
            n_samples=int(data["n_samples"]),
            scorer=str(data["scorer"]),
            per_sample={k: dict(v) for k, v in data.get("per_sample", {}).items()},
        )


def fact_check_sample(
    annotation: Annotation, labels: FeatureLabels, scorer
) -> tuple[Annotation, dict[str, NLIVerdict]]:
    """Score each sentence against its fact sentence; replace contradicted extrema.

    The oracle sentence is the NLI premise and the annotation sentence the
    hypothesis. Only the extrema field is ever rewritten.
    """
    facts = fact_sentences(labels)
    verdicts = {
        f: nli_compare(facts[f], annotation.sentence(f), scorer, field=f) for f in FIELDS
    }
    if verdicts["extrema"].label is NLILabel.CONTRADICTION:
        annotation = replace(
            annotation,
            extrema_sentence=facts["extrema"],
            source=AnnotationSource.REPLACED,
        )
    return annotation, verdicts


def _report_from_verdicts(
    verdicts_by_id: dict[str, dict[str, NLIVerdict]], scorer_name: str
) -> FactCheckReport:
    n = len(verdicts_by_id)
    rates = {
        f: sum(1 for v in verdicts_by_id.values() if v[f].label is not NLILabel.CONTRADICTION) / n
        for f in FIELDS
    }
    replaced = [i for i, v in verdicts_by_id.items() if v["extrema"].label is NLILabel.CONTRADICTION]
    retained = [
        i
        for i, v in verdicts_by_id.items()
        if v["trend"].label is NLILabel.CONTRADICTION or v["noise"].label is NLILabel.CONTRADICTION
    ]
    return FactCheckReport(
        rates=rates,
        replaced_ids=replaced,
        retained_ids=retained,
        n_samples=n,
        scorer=scorer_name,
        per_sample={i: {f: v[f].label.value for f in FIELDS} for i, v in verdicts_by_id.items()},
    )


def apply_fact_check(
    items: Iterable[tuple[str, Annotation, FeatureLabels]], scorer
) -> tuple[dict[str, Annotation], FactCheckReport]:
    """Run :func:`fact_check_sample` over a dataset; returns updates and the report."""
    verdicts_by_id: dict[str, dict[str, NLIVerdict]] = {}
    updated: dict[str, Annotation] = {}
    for sample_id, annotation, labels in items:
        new_annotation, verdicts = fact_check_sample(annotation, labels, scorer)
        verdicts_by_id[sample_id] = verdicts
        updated[sample_id] = new_annotation
    if not verdicts_by_id:
        raise ValidationError("cannot fact-check an empty dataset")
    scorer_name = getattr(scorer, "name", type(scorer).__name__)
    return updated, _report_from_verdicts(verdicts_by_id, scorer_name)


def agreement_report(items: Iterable[tuple[str, Annotation, FeatureLabels]], scorer) -> FactCheckReport:
    """Per-field agreement rates (fraction of verdicts that are not contradictions)."""
    return apply_fact_check(items, scorer)[1]
