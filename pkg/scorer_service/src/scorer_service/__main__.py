"""Run the scoring service: python -m scorer_service --port 8400"""

import argparse
import logging

import uvicorn

from .app import ServiceConfig, create_app
from .backends import DEFAULT_EMBED_MODEL, DEFAULT_NLI_MODEL


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="scorer-service", description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8400)
    parser.add_argument("--embed-model", default=DEFAULT_EMBED_MODEL,
                        help="sentence-transformers model id or local path")
    parser.add_argument("--nli-model", default=DEFAULT_NLI_MODEL,
                        help="NLI sequence-classification model id or local path")
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    config = ServiceConfig(embed_model=args.embed_model, nli_model=args.nli_model, device=args.device)
    uvicorn.run(create_app(config=config), host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
