"""Embedding and NLI scoring microservice."""

__version__ = "0.1.0"

from .backends import (
    DEFAULT_EMBED_MODEL,
    DEFAULT_NLI_MODEL,
    NLI_LABELS,
    SentenceTransformerBackend,
    TransformersNliBackend,
)

__all__ = [
    "DEFAULT_EMBED_MODEL",
    "DEFAULT_NLI_MODEL",
    "NLI_LABELS",
    "SentenceTransformerBackend",
    "TransformersNliBackend",
    "create_app",
    "ServiceConfig",
]


def create_app(*args, **kwargs):
    from .app import create_app as _create_app

    return _create_app(*args, **kwargs)


def __getattr__(name):
    if name == "ServiceConfig":
        from .app import ServiceConfig

        return ServiceConfig
    raise AttributeError(name)
