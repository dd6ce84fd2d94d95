"""Service entry point: pick a backend, bind a port, serve."""

import argparse

import uvicorn

from .app import create_app
from .backends import (
    DEFAULT_GENERATE_MODEL,
    DEFAULT_QA_MODEL,
    MockBackend,
    TransformersBackend,
    load_fixture,
)


def build_backend(args):
    if args.mock:
        rules = load_fixture(args.fixture) if args.fixture else []
        return MockBackend(rules)
    return TransformersBackend(
        generate_model=args.generate_model,
        qa_model=args.qa_model,
        no_answer_threshold=args.no_answer_threshold,
        device=args.device,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wikicausal-shim")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8009)
    parser.add_argument("--mock", action="store_true", help="serve scripted answers")
    parser.add_argument("--fixture", help="mock fixture JSONL")
    parser.add_argument("--generate-model", default=DEFAULT_GENERATE_MODEL)
    parser.add_argument("--qa-model", default=DEFAULT_QA_MODEL)
    parser.add_argument("--no-answer-threshold", type=float, default=0.0)
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)
    app = create_app(build_backend(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
