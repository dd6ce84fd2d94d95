"""Clients and deterministic mocks for the inference wire protocol.

The protocol has two JSON-over-HTTP operations relative to an endpoint URL:
``POST /v1/generate`` {prompt, n, max_new_tokens, temperature, seed} ->
{completions: [n strings]} and ``POST /v1/qa`` {question, context} ->
{text, score, no_answer}. ``GET /v1/health`` reports model identifiers.
The mocks answer from a scripted fixture keyed by substring match and have
no model or network dependency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import requests

from .extractor import QaAnswer, QaRequest


class InferenceError(RuntimeError):
    """The backend is unreachable or violated the wire contract."""


def parse_generate_response(obj: dict, n: int) -> list[str]:
    completions = obj.get("completions")
    if not isinstance(completions, list) or not all(
        isinstance(c, str) for c in completions
    ):
        raise InferenceError(f"bad generate response: {obj!r}")
    if len(completions) != n:
        raise InferenceError(
            f"generate response has {len(completions)} completions, expected {n}"
        )
    return completions


def parse_qa_response(obj: dict) -> QaAnswer:
    if not isinstance(obj, dict) or "text" not in obj:
        raise InferenceError(f"bad qa response: {obj!r}")
    return QaAnswer(
        text=obj.get("text", ""),
        score=obj.get("score"),
        no_answer=bool(obj.get("no_answer", False)),
    )


class HttpGenerator:
    """Generative backend over the wire protocol. Single attempt per call;
    retry policy belongs to the caller."""

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def generate(self, prompt, n, max_new_tokens, temperature, seed=None) -> list[str]:
        payload = {
            "prompt": prompt,
            "n": n,
            "max_new_tokens": max_new_tokens,
            "temperature": temperature,
            "seed": seed,
        }
        try:
            response = requests.post(
                f"{self.endpoint}/v1/generate", json=payload, timeout=self.timeout
            )
            response.raise_for_status()
            body = response.json()
        except (requests.RequestException, json.JSONDecodeError) as exc:
            raise InferenceError(f"generate call failed: {exc}") from exc
        return parse_generate_response(body, n)


class HttpQaBackend:
    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def answer(self, request: QaRequest) -> QaAnswer:
        payload = {"question": request.question, "context": request.context}
        try:
            response = requests.post(
                f"{self.endpoint}/v1/qa", json=payload, timeout=self.timeout
            )
            response.raise_for_status()
            body = response.json()
        except (requests.RequestException, json.JSONDecodeError) as exc:
            raise InferenceError(f"qa call failed: {exc}") from exc
        return parse_qa_response(body)


def check_health(endpoint: str, timeout: float = 10.0) -> dict:
    try:
        response = requests.get(f"{endpoint.rstrip('/')}/v1/health", timeout=timeout)
        response.raise_for_status()
        return response.json()
    except (requests.RequestException, json.JSONDecodeError) as exc:
        raise InferenceError(f"health check failed: {exc}") from exc


@dataclass(frozen=True)
class GenerateRule:
    match: str
    completions: tuple[str, ...]


@dataclass(frozen=True)
class QaRule:
    match: str
    answer: str
    score: float


class MockGenerator:
    """Scripted generator: first rule whose ``match`` substring occurs in the
    prompt wins; its completions are cycled out to n. Ignores temperature and
    seed, so output is identical across calls by construction."""

    def __init__(self, rules: list[GenerateRule] = (), default: str = "no"):
        self.rules = list(rules)
        self.default = default

    def generate(self, prompt, n, max_new_tokens, temperature, seed=None) -> list[str]:
        completions = (self.default,)
        for rule in self.rules:
            if rule.match in prompt:
                completions = rule.completions
                break
        return [completions[i % len(completions)] for i in range(n)]


class ScriptedGenerator:
    """Replays a fixed completion sequence; for vote-table tests."""

    def __init__(self, completions: list[str]):
        self.completions = list(completions)
        self.cursor = 0

    def generate(self, prompt, n, max_new_tokens, temperature, seed=None) -> list[str]:
        if self.cursor + n > len(self.completions):
            raise InferenceError("scripted generator exhausted")
        batch = self.completions[self.cursor : self.cursor + n]
        self.cursor += n
        return batch


class MockQaBackend:
    """Scripted extractive QA: rule matches against question or context;
    no rule means no answer."""

    def __init__(self, rules: list[QaRule] = ()):
        self.rules = list(rules)

    def answer(self, request: QaRequest) -> QaAnswer:
        for rule in self.rules:
            if rule.match in request.question or rule.match in request.context:
                return QaAnswer(text=rule.answer, score=rule.score)
        return QaAnswer(text="", no_answer=True)


def load_mock_fixture(path) -> tuple[list[GenerateRule], list[QaRule]]:
    """Fixture JSONL: {match, completion} rows script the generator,
    {match, answer, score} rows script the QA backend."""
    generate_rules: list[GenerateRule] = []
    qa_rules: list[QaRule] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InferenceError(f"fixture line {line_no}: {exc}") from exc
            if "completion" in obj:
                completion = obj["completion"]
                completions = (
                    tuple(completion) if isinstance(completion, list) else (completion,)
                )
                generate_rules.append(
                    GenerateRule(match=obj["match"], completions=completions)
                )
            elif "answer" in obj:
                qa_rules.append(
                    QaRule(
                        match=obj["match"],
                        answer=obj["answer"],
                        score=float(obj.get("score", 1.0)),
                    )
                )
            else:
                raise InferenceError(
                    f"fixture line {line_no}: needs 'completion' or 'answer'"
                )
    return generate_rules, qa_rules
