import hashlib

import numpy as np
import pytest


class StubEmbedBackend:
    """Deterministic hash featurizer standing in for a sentence encoder."""

    identifier = "stub-embed"

    def embed(self, texts):
        vectors = []
        for text in texts:
            digest = hashlib.sha256(text.encode()).digest()
            vec = np.frombuffer(digest, dtype=np.uint8).astype(float)
            vectors.append(vec / np.linalg.norm(vec))
        return np.array(vectors)


class StubNliBackend:
    """Deterministic probabilities derived from the input pair."""

    identifier = "stub-nli"

    def classify(self, premise, hypothesis):
        if premise == hypothesis:
            return {"entailment": 0.98, "neutral": 0.015, "contradiction": 0.005}
        digest = hashlib.sha256(f"{premise}\x00{hypothesis}".encode()).digest()
        raw = np.frombuffer(digest[:3], dtype=np.uint8).astype(float) + 1.0
        probs = raw / raw.sum()
        return {"entailment": probs[0], "neutral": probs[1], "contradiction": probs[2]}


@pytest.fixture
def stub_app():
    from scorer_service.app import create_app

    return create_app(embed_backend=StubEmbedBackend(), nli_backend=StubNliBackend())


@pytest.fixture
def stub_client(stub_app):
    from fastapi.testclient import TestClient

    with TestClient(stub_app) as client:
        yield client


def _write_tiny_vocab(path):
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + list("abcdefghijklmnopqrstuvwxyz") + [
        "the", "time", "series", "is", "shows", "an", "overall", "trend", "noise",
        "intensity", "increasing", "decreasing", "flat", "low", "medium", "high",
        "maximum", "minimum", "occurs", "around", "beginning", "middle", "end", "of", "and",
    ]
    path.mkdir(parents=True, exist_ok=True)
    (path / "vocab.txt").write_text("\n".join(vocab))
    return len(vocab)


@pytest.fixture(scope="session")
def tiny_nli_dir(tmp_path_factory):
    """Randomly initialized 3-label classifier saved locally; exercises the
    real transformers load/inference path without any network access."""
    import torch
    from transformers import BertConfig, BertForSequenceClassification, BertTokenizerFast

    base = tmp_path_factory.mktemp("tiny_nli")
    vocab_size = _write_tiny_vocab(base / "vocab")
    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=vocab_size, hidden_size=16, num_hidden_layers=1, num_attention_heads=2,
        intermediate_size=32, max_position_embeddings=128, num_labels=3,
        id2label={0: "CONTRADICTION", 1: "NEUTRAL", 2: "ENTAILMENT"},
        label2id={"CONTRADICTION": 0, "NEUTRAL": 1, "ENTAILMENT": 2},
    )
    model_dir = base / "model"
    BertForSequenceClassification(config).save_pretrained(model_dir)
    BertTokenizerFast(vocab_file=str(base / "vocab" / "vocab.txt"), do_lower_case=True).save_pretrained(model_dir)
    return str(model_dir)


@pytest.fixture(scope="session")
def tiny_embed_dir(tmp_path_factory):
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    base = tmp_path_factory.mktemp("tiny_embed")
    vocab_size = _write_tiny_vocab(base / "vocab")
    torch.manual_seed(1)
    config = BertConfig(
        vocab_size=vocab_size, hidden_size=16, num_hidden_layers=1, num_attention_heads=2,
        intermediate_size=32, max_position_embeddings=128,
    )
    bert_dir = base / "bert"
    BertModel(config).save_pretrained(bert_dir)
    BertTokenizerFast(vocab_file=str(base / "vocab" / "vocab.txt"), do_lower_case=True).save_pretrained(bert_dir)

    from sentence_transformers import SentenceTransformer

    try:
        from sentence_transformers.sentence_transformer.modules import Pooling, Transformer
    except ImportError:
        from sentence_transformers.models import Pooling, Transformer

    st_dir = base / "st"
    SentenceTransformer(modules=[Transformer(str(bert_dir)), Pooling(16)]).save(str(st_dir))
    return str(st_dir)


def pretrained_or_skip():
    """Load the paper's default models, or skip when the hub is unreachable."""
    from scorer_service.backends import SentenceTransformerBackend, TransformersNliBackend

    try:
        embed = SentenceTransformerBackend()
        nli = TransformersNliBackend()
    except Exception as exc:
        pytest.skip(f"pretrained models unavailable in this environment: {exc}")
    return embed, nli
