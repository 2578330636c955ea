"""Three-sentence annotations: remote multimodal annotator and offline oracle.

The remote path posts the fixed annotation prompt plus a base64 PNG to a
chat-completion-style endpoint and validates the JSON reply, re-asking
with the parse error appended when the model returns something malformed.
The offline path (:func:`mock_annotate`) renders the fact sentences from
the feature oracle, which makes fully deterministic end-to-end runs
possible without any network.
"""

from __future__ import annotations

import base64
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import requests

from .errors import AnnotationFormatError, TransportError, ValidationError
from .features import FeatureLabels, SeriesLike, compute_labels, fact_sentences, OracleConfig

__all__ = [
    "Annotation",
    "AnnotationSource",
    "AnnotatorConfig",
    "AnnotationClient",
    "build_prompt",
    "parse_annotation_json",
    "render_fact_sentences",
    "mock_annotate",
    "annotate",
]

log = logging.getLogger(__name__)

ANNOTATION_FIELDS = ("trend", "noise", "extrema")

_PROMPT = (
    "Describe the time series in three sentences. "
    "First sentence: describe trend (increasing/decreasing/flat). "
    "Second sentence: noise intensity (low/medium/high). "
    "Third sentence: approximate localisation of global maximum (beginning/middle/end) "
    "and global minimum (beginning/middle/end). "
    "Put the description in a JSON format with the following pattern "
    '{ "trend": <sentence1>, "noise": <sentence2>, "extrema": <sentence3> }'
)


class AnnotationSource(str, Enum):
    LLM = "llm"
    ORACLE = "oracle"
    REPLACED = "replaced"


@dataclass(frozen=True)
class Annotation:
    trend_sentence: str
    noise_sentence: str
    extrema_sentence: str
    source: AnnotationSource

    def __post_init__(self):
        for name in ("trend_sentence", "noise_sentence", "extrema_sentence"):
            if not getattr(self, name).strip():
                raise ValidationError(f"{name} must be non-empty")

    def sentence(self, field: str) -> str:
        if field not in ANNOTATION_FIELDS:
            raise ValidationError(f"unknown field: {field!r}")
        return getattr(self, f"{field}_sentence")

    def paragraph(self) -> str:
        return " ".join(self.sentence(f) for f in ANNOTATION_FIELDS)

    def pattern_json(self) -> str:
        """The annotation in the three-key JSON pattern used for prompts and SFT."""
        return json.dumps(
            {f: self.sentence(f) for f in ANNOTATION_FIELDS}, ensure_ascii=False
        )


@dataclass(frozen=True)
class AnnotatorConfig:
    endpoint: str = ""
    model: str = ""
    api_key_env: str = ""
    max_retries: int = 2
    timeout: float = 60.0
    temperature: float = 0.0
    include_digits: bool = False
    max_parallel: int = 4
    backoff_base: float = 0.5

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValidationError(f"max_retries must be >= 0, got {self.max_retries}")
        if not self.timeout > 0:
            raise ValidationError(f"timeout must be > 0, got {self.timeout}")
        if self.max_parallel < 1:
            raise ValidationError(f"max_parallel must be >= 1, got {self.max_parallel}")


def build_prompt() -> str:
    """The fixed annotation prompt; constant across calls."""
    return _PROMPT


def parse_annotation_json(text: str, source: AnnotationSource = AnnotationSource.LLM) -> Annotation:
    """Extract the first JSON object from ``text`` and validate its three keys.

    Surrounding prose and markdown code fences are tolerated; the object
    must carry exactly the keys trend/noise/extrema with non-empty string
    values.
    """
    decoder = json.JSONDecoder()
    obj = None
    pos = text.find("{")
    while pos != -1:
        try:
            candidate, _ = decoder.raw_decode(text, pos)
        except json.JSONDecodeError:
            pos = text.find("{", pos + 1)
            continue
        if isinstance(candidate, dict):
            obj = candidate
            break
        pos = text.find("{", pos + 1)
    if obj is None:
        raise AnnotationFormatError("no JSON object found in reply", raw_reply=text)
    for key in ANNOTATION_FIELDS:
        if key not in obj:
            raise AnnotationFormatError(f"missing key: {key}", raw_reply=text)
        if not isinstance(obj[key], str):
            raise AnnotationFormatError(f"non-string value for key: {key}", raw_reply=text)
        if not obj[key].strip():
            raise AnnotationFormatError(f"empty value for key: {key}", raw_reply=text)
    extra = sorted(set(obj) - set(ANNOTATION_FIELDS))
    if extra:
        raise AnnotationFormatError(f"unexpected key: {extra[0]}", raw_reply=text)
    return Annotation(
        trend_sentence=obj["trend"].strip(),
        noise_sentence=obj["noise"].strip(),
        extrema_sentence=obj["extrema"].strip(),
        source=source,
    )


def render_fact_sentences(labels: FeatureLabels) -> Annotation:
    """The three fact-based reference sentences, marked as oracle output."""
    facts = fact_sentences(labels)
    return Annotation(
        trend_sentence=facts["trend"],
        noise_sentence=facts["noise"],
        extrema_sentence=facts["extrema"],
        source=AnnotationSource.ORACLE,
    )


def mock_annotate(series: SeriesLike, oracle: OracleConfig | None = None) -> Annotation:
    """Offline annotator backed by the feature oracle."""
    return render_fact_sentences(compute_labels(series, oracle))


class AnnotationClient:
    """Bounded-parallelism client for a chat-completion-style endpoint.

    The API key is read from the configured environment variable at call
    time and only ever placed in the Authorization header.
    """

    def __init__(self, config: AnnotatorConfig):
        if not config.endpoint:
            raise ValidationError("annotator endpoint must be configured")
        self.config = config
        self._slots = threading.BoundedSemaphore(config.max_parallel)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key_env:
            key = os.environ.get(self.config.api_key_env)
            if not key:
                raise ValidationError(
                    f"API key environment variable {self.config.api_key_env} is not set"
                )
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, messages: list[dict]) -> str:
        payload = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": messages,
        }
        attempts = self.config.max_retries + 1
        for attempt in range(attempts):
            try:
                resp = requests.post(
                    self.config.endpoint,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.config.timeout,
                )
            except requests.RequestException as exc:
                raise TransportError(f"annotator request failed: {exc}") from exc
            if resp.status_code in (401, 403):
                raise TransportError(f"annotator authentication failed (HTTP {resp.status_code})")
            if resp.status_code == 429 or resp.status_code >= 500:
                if attempt + 1 < attempts:
                    delay = self.config.backoff_base * 2**attempt
                    log.warning(
                        "annotator returned HTTP %d, backing off %.2fs (attempt %d/%d)",
                        resp.status_code, delay, attempt + 1, attempts,
                    )
                    time.sleep(delay)
                    continue
                raise TransportError(f"annotator unavailable (HTTP {resp.status_code})")
            if resp.status_code != 200:
                raise TransportError(f"annotator rejected request (HTTP {resp.status_code})")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"annotator returned an unexpected payload: {exc}") from exc
        raise TransportError("annotator retries exhausted")  # pragma: no cover

    def annotate(self, image_path: str | Path, digits_text: str | None = None) -> Annotation:
        """Annotate one rendered plot; re-asks on malformed JSON replies."""
        image_path = Path(image_path)
        if not image_path.is_file():
            raise ValidationError(f"image not found: {image_path}")
        encoded = base64.b64encode(image_path.read_bytes()).decode("ascii")
        text = build_prompt()
        if self.config.include_digits and digits_text:
            text = f"{text}\n\nNumerical values:\n{digits_text}"
        content = [
            {"type": "text", "text": text},
            {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{encoded}"}},
        ]
        messages: list[dict] = [{"role": "user", "content": content}]

        with self._slots:
            last_error: AnnotationFormatError | None = None
            for attempt in range(self.config.max_retries + 1):
                reply = self._post(messages)
                try:
                    return parse_annotation_json(reply)
                except AnnotationFormatError as exc:
                    last_error = exc
                    log.warning(
                        "annotation parse failed (%s), retry %d/%d",
                        exc, attempt + 1, self.config.max_retries,
                    )
                    messages = messages + [
                        {"role": "assistant", "content": reply},
                        {
                            "role": "user",
                            "content": (
                                f"Your reply could not be parsed: {exc}. Reply with only a JSON "
                                'object of the form { "trend": <sentence1>, "noise": <sentence2>, '
                                '"extrema": <sentence3> }.'
                            ),
                        },
                    ]
        raise last_error


def annotate(image_path: str | Path, config: AnnotatorConfig) -> Annotation:
    """One-shot convenience wrapper around :class:`AnnotationClient`."""
    return AnnotationClient(config).annotate(image_path)
