"""Sentence scorers: rule-based category comparison and the remote NLI/embedding client.

The rule-based scorer extracts categorical claims from sentences and maps
them onto entailment/neutral/contradiction verdicts, which makes the whole
fact-check and feature-metric path runnable offline. The remote scorer
talks to the scoring microservice over HTTP and upgrades fidelity without
changing any contract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

import numpy as np
import requests

from .errors import TransportError, ValidationError
from .features import Location, Noise, Trend

__all__ = [
    "NLILabel",
    "NLIVerdict",
    "ExtremaClaim",
    "extract_category",
    "RuleBasedScorer",
    "RemoteScorer",
    "nli_compare",
    "FIELDS",
]

FIELDS = ("trend", "noise", "extrema")


class NLILabel(str, Enum):
    ENTAILMENT = "entailment"
    NEUTRAL = "neutral"
    CONTRADICTION = "contradiction"


_SCORE_TABLE = {NLILabel.ENTAILMENT: 1.0, NLILabel.NEUTRAL: 0.5, NLILabel.CONTRADICTION: 0.0}


@dataclass(frozen=True)
class NLIVerdict:
    label: NLILabel

    @property
    def score(self) -> float:
        return _SCORE_TABLE[self.label]


@dataclass(frozen=True)
class ExtremaClaim:
    """Locations a sentence asserts for the global maximum and minimum."""

    max_loc: Location | None
    min_loc: Location | None


_TREND_WORDS = {
    Trend.INCREASING: (r"\bincreasing\b",),
    Trend.DECREASING: (r"\bdecreasing\b",),
    Trend.FLAT: (r"\bflat\b", r"\bno clear trend\b"),
}
_NOISE_WORDS = {
    Noise.LOW: (r"\blow\b",),
    Noise.MEDIUM: (r"\bmedium\b",),
    Noise.HIGH: (r"\bhigh\b",),
}
_LOCATION_RE = re.compile(r"\b(beginning|middle|end)\b", re.IGNORECASE)
_MAX_RE = re.compile(r"\bmax(?:imum|ima)?\b", re.IGNORECASE)
_MIN_RE = re.compile(r"\bmin(?:imum|ima)?\b", re.IGNORECASE)


def _match_single(text: str, table) -> object | None:
    found = {
        category
        for category, patterns in table.items()
        if any(re.search(p, text, re.IGNORECASE) for p in patterns)
    }
    if len(found) == 1:
        return found.pop()
    return None


def _extract_extrema(text: str) -> ExtremaClaim | None:
    anchors = [(m.start(), "max") for m in _MAX_RE.finditer(text)]
    anchors += [(m.start(), "min") for m in _MIN_RE.finditer(text)]
    if not anchors:
        return None
    anchors.sort()
    assigned: dict[str, set[Location]] = {"max": set(), "min": set()}
    for m in _LOCATION_RE.finditer(text):
        # nearest mention wins; ties go to the earlier mention
        _, kind = min(anchors, key=lambda a: (abs(m.start() - a[0]), a[0]))
        assigned[kind].add(Location(m.group(1).lower()))
    max_loc = assigned["max"].pop() if len(assigned["max"]) == 1 else None
    min_loc = assigned["min"].pop() if len(assigned["min"]) == 1 else None
    if max_loc is None and min_loc is None:
        return None
    return ExtremaClaim(max_loc=max_loc, min_loc=min_loc)


def extract_category(sentence: str, field: str):
    """Case-insensitive keyword extraction of the categorical claim in a sentence.

    Returns None when no unambiguous category is present (no keyword, or
    conflicting keywords for the same slot).
    """
    if field == "trend":
        return _match_single(sentence, _TREND_WORDS)
    if field == "noise":
        return _match_single(sentence, _NOISE_WORDS)
    if field == "extrema":
        return _extract_extrema(sentence)
    raise ValidationError(f"unknown field: {field!r}")


_TREND_ORDER = [Trend.INCREASING, Trend.FLAT, Trend.DECREASING]
_NOISE_ORDER = [Noise.LOW, Noise.MEDIUM, Noise.HIGH]


def _ordinal_verdict(a, b, order) -> NLIVerdict:
    if a == b:
        return NLIVerdict(NLILabel.ENTAILMENT)
    if abs(order.index(a) - order.index(b)) >= 2:
        return NLIVerdict(NLILabel.CONTRADICTION)
    return NLIVerdict(NLILabel.NEUTRAL)


def _extrema_verdict(a: ExtremaClaim, b: ExtremaClaim) -> NLIVerdict:
    pairs = [(a.max_loc, b.max_loc), (a.min_loc, b.min_loc)]
    if any(x is not None and y is not None and x != y for x, y in pairs):
        return NLIVerdict(NLILabel.CONTRADICTION)
    if all(x is not None and x == y for x, y in pairs):
        return NLIVerdict(NLILabel.ENTAILMENT)
    return NLIVerdict(NLILabel.NEUTRAL)


class RuleBasedScorer:
    """Offline verdicts from the category tables; symmetric on template sentences."""

    name = "rule"

    def nli(self, premise: str, hypothesis: str, field: str | None = None) -> NLIVerdict:
        if field is None:
            field = self._infer_field(premise, hypothesis)
            if field is None:
                return NLIVerdict(NLILabel.NEUTRAL)
        a = extract_category(premise, field)
        b = extract_category(hypothesis, field)
        if a is None or b is None:
            return NLIVerdict(NLILabel.NEUTRAL)
        if field == "trend":
            return _ordinal_verdict(a, b, _TREND_ORDER)
        if field == "noise":
            return _ordinal_verdict(a, b, _NOISE_ORDER)
        return _extrema_verdict(a, b)

    @staticmethod
    def _infer_field(premise: str, hypothesis: str) -> str | None:
        for field in FIELDS:
            if extract_category(premise, field) is not None and extract_category(
                hypothesis, field
            ) is not None:
                return field
        return None


class RemoteScorer:
    """Client for the scoring microservice (/v1/nli and /v1/embed)."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        if not base_url:
            raise ValidationError("scorer base URL must be configured")
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.name = f"remote({self.base_url})"

    def _post(self, route: str, payload: dict) -> dict:
        url = f"{self.base_url}{route}"
        try:
            resp = requests.post(url, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"scorer service unreachable at {url}: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"scorer service error (HTTP {resp.status_code}) at {url}")
        try:
            return resp.json()
        except ValueError as exc:
            raise TransportError(f"scorer service returned invalid JSON at {url}") from exc

    def nli(self, premise: str, hypothesis: str, field: str | None = None) -> NLIVerdict:
        del field  # the NLI model is field-agnostic
        body = self._post("/v1/nli", {"premise": premise, "hypothesis": hypothesis})
        try:
            return NLIVerdict(NLILabel(body["label"]))
        except (KeyError, ValueError) as exc:
            raise TransportError(f"scorer service returned an unexpected NLI payload: {body!r}") from exc

    def embed(self, texts: list[str]) -> np.ndarray:
        body = self._post("/v1/embed", {"texts": list(texts)})
        try:
            vectors = np.asarray(body["vectors"], dtype=float)
        except (KeyError, ValueError) as exc:
            raise TransportError("scorer service returned an unexpected embed payload") from exc
        if vectors.ndim != 2 or vectors.shape[0] != len(texts):
            raise TransportError(
                f"scorer service returned {vectors.shape} vectors for {len(texts)} texts"
            )
        return vectors

    def health(self) -> dict:
        url = f"{self.base_url}/v1/health"
        try:
            resp = requests.get(url, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"scorer service unreachable at {url}: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"scorer service not ready (HTTP {resp.status_code})")
        return resp.json()


def nli_compare(premise: str, hypothesis: str, scorer, field: str | None = None) -> NLIVerdict:
    """Compare two sentences through the given scorer."""
    if not premise.strip() or not hypothesis.strip():
        raise ValidationError("premise and hypothesis must be non-empty")
    return scorer.nli(premise, hypothesis, field=field)
