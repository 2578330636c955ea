"""FastAPI application exposing /v1/embed, /v1/nli, and /v1/health.

Responses are deterministic per model version. NLI probabilities are
emitted in the fixed order [entailment, neutral, contradiction]; the label
is the argmax of that vector. Embedding vectors are L2-normalized before
they leave the service. Endpoints answer 503 until both models are
loaded, 400 on request validation failures.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .backends import (
    DEFAULT_EMBED_MODEL,
    DEFAULT_NLI_MODEL,
    NLI_LABELS,
    EmbeddingBackend,
    NliBackend,
)

log = logging.getLogger("scorer_service")

MAX_BATCH = 64
MAX_TEXT_CHARS = 2000


@dataclass
class ServiceConfig:
    embed_model: str = DEFAULT_EMBED_MODEL
    nli_model: str = DEFAULT_NLI_MODEL
    device: str = "cpu"


class EmbedRequest(BaseModel):
    texts: list[str]


class NliRequest(BaseModel):
    premise: str
    hypothesis: str


def create_app(
    embed_backend: EmbeddingBackend | None = None,
    nli_backend: NliBackend | None = None,
    config: ServiceConfig | None = None,
) -> FastAPI:
    """Build the app, either around preloaded backends or a config to load from.

    With a config, models load in a background thread so the service can
    answer health probes (503) immediately.
    """
    app = FastAPI(title="scorer-service", version=__version__)
    app.state.embed_backend = embed_backend
    app.state.nli_backend = nli_backend
    app.state.load_error = None
    app.state.lock = threading.Lock()

    if config is not None and (embed_backend is None or nli_backend is None):

        def _load():
            try:
                from .backends import SentenceTransformerBackend, TransformersNliBackend

                if app.state.embed_backend is None:
                    log.info("loading embedding model %s", config.embed_model)
                    app.state.embed_backend = SentenceTransformerBackend(
                        config.embed_model, device=config.device
                    )
                if app.state.nli_backend is None:
                    log.info("loading NLI model %s", config.nli_model)
                    app.state.nli_backend = TransformersNliBackend(
                        config.nli_model, device=config.device
                    )
                log.info("models ready")
            except Exception as exc:  # surfaced through /v1/health
                log.exception("model loading failed")
                app.state.load_error = str(exc)

        threading.Thread(target=_load, daemon=True).start()

    @app.exception_handler(RequestValidationError)
    async def _validation_to_400(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def _ready() -> tuple[EmbeddingBackend, NliBackend]:
        embed, nli = app.state.embed_backend, app.state.nli_backend
        if embed is None or nli is None:
            detail = app.state.load_error or "models are still loading"
            raise HTTPException(status_code=503, detail=detail)
        return embed, nli

    @app.post("/v1/embed")
    def embed(request: EmbedRequest):
        backend, _ = _ready()
        if not 1 <= len(request.texts) <= MAX_BATCH:
            raise HTTPException(status_code=400, detail=f"texts must contain 1..{MAX_BATCH} items")
        too_long = [i for i, t in enumerate(request.texts) if len(t) > MAX_TEXT_CHARS]
        if too_long:
            raise HTTPException(
                status_code=400,
                detail=f"text {too_long[0]} exceeds {MAX_TEXT_CHARS} characters",
            )
        with app.state.lock:
            vectors = np.asarray(backend.embed(request.texts), dtype=float)
        if vectors.ndim != 2 or vectors.shape[0] != len(request.texts):
            raise HTTPException(status_code=500, detail="backend returned a malformed batch")
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        vectors = vectors / norms
        return {"vectors": vectors.tolist(), "dim": int(vectors.shape[1])}

    @app.post("/v1/nli")
    def nli(request: NliRequest):
        _, backend = _ready()
        if not request.premise.strip() or not request.hypothesis.strip():
            raise HTTPException(status_code=400, detail="premise and hypothesis must be non-empty")
        with app.state.lock:
            probs_by_label = backend.classify(request.premise, request.hypothesis)
        probs = [float(probs_by_label[label]) for label in NLI_LABELS]
        total = sum(probs)
        if not 0.9999 <= total <= 1.0001:
            raise HTTPException(status_code=500, detail="backend probabilities are not a simplex")
        label = NLI_LABELS[int(np.argmax(probs))]
        return {"label": label, "probs": probs}

    @app.get("/v1/health")
    def health():
        embed, nli_backend = app.state.embed_backend, app.state.nli_backend
        models = {
            "embed": getattr(embed, "identifier", None),
            "nli": getattr(nli_backend, "identifier", None),
        }
        versions = {"scorer_service": __version__}
        if embed is None or nli_backend is None:
            status = "error" if app.state.load_error else "loading"
            return JSONResponse(
                status_code=503,
                content={"status": status, "models": models, "versions": versions,
                         "error": app.state.load_error},
            )
        return {"status": "ok", "models": models, "versions": versions}

    return app
