"""Model backends behind the HTTP surface.

The wire contract never names a model: any backend exposing the two small
interfaces below can serve. Defaults target the sentence-transformers
MiniLM embedder and a roberta-large MNLI cross-encoder; identifiers may
also be local directories.
"""

from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np

DEFAULT_EMBED_MODEL = "sentence-transformers/all-MiniLM-L6-v2"
DEFAULT_NLI_MODEL = "roberta-large-mnli"

NLI_LABELS = ("entailment", "neutral", "contradiction")


class EmbeddingBackend(Protocol):
    identifier: str

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class NliBackend(Protocol):
    identifier: str

    def classify(self, premise: str, hypothesis: str) -> dict[str, float]:
        """Probabilities keyed by the labels in NLI_LABELS."""
        ...


class SentenceTransformerBackend:
    """Sentence-transformers encoder; vectors come back L2-normalized."""

    def __init__(self, model_id: str = DEFAULT_EMBED_MODEL, device: str = "cpu"):
        from sentence_transformers import SentenceTransformer

        self.model = SentenceTransformer(model_id, device=device)
        self.identifier = model_id

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        return self.model.encode(
            list(texts),
            convert_to_numpy=True,
            normalize_embeddings=True,
            show_progress_bar=False,
        )


class TransformersNliBackend:
    """Sequence-classification cross-encoder mapped onto the NLI label set."""

    def __init__(self, model_id: str = DEFAULT_NLI_MODEL, device: str = "cpu"):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForSequenceClassification.from_pretrained(model_id)
        self.model.to(device).eval()
        self.identifier = model_id
        id2label = self.model.config.id2label
        self._labels = [id2label[i].lower() for i in range(len(id2label))]
        unknown = set(self._labels) - set(NLI_LABELS)
        if unknown or len(self._labels) != 3:
            raise ValueError(
                f"model {model_id} is not an NLI classifier (labels: {self._labels})"
            )

    def classify(self, premise: str, hypothesis: str) -> dict[str, float]:
        encoded = self.tokenizer(premise, hypothesis, return_tensors="pt", truncation=True)
        encoded = {k: v.to(self.model.device) for k, v in encoded.items()}
        with self._torch.no_grad():
            logits = self.model(**encoded).logits[0]
        probs = logits.softmax(-1).tolist()
        return {label: float(p) for label, p in zip(self._labels, probs)}
