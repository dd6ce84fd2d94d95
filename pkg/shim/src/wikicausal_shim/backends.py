"""Model backends: scripted mock and lazy-loaded transformer models."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass

DEFAULT_GENERATE_MODEL = "allenai/tk-instruct-3b-def"
DEFAULT_QA_MODEL = "distilbert-base-uncased-distilled-squad"


class BackendError(RuntimeError):
    """Model invocation failed."""


@dataclass(frozen=True)
class MockRule:
    match: str
    completions: tuple[str, ...] = ()
    answer: str | None = None
    score: float = 1.0


def load_fixture(path) -> list[MockRule]:
    """Fixture JSONL: {match, completion} scripts generation, {match, answer,
    score} scripts QA. First matching rule wins, by substring."""
    rules = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"fixture line {line_no}: {exc}") from exc
            if "completion" in obj:
                completion = obj["completion"]
                completions = (
                    tuple(completion) if isinstance(completion, list) else (completion,)
                )
                rules.append(MockRule(match=obj["match"], completions=completions))
            elif "answer" in obj:
                rules.append(
                    MockRule(
                        match=obj["match"],
                        answer=obj["answer"],
                        score=float(obj.get("score", 1.0)),
                    )
                )
            else:
                raise ValueError(
                    f"fixture line {line_no}: needs 'completion' or 'answer'"
                )
    return rules


class MockBackend:
    """Deterministic scripted backend; no model dependency, instant startup.

    Generation ignores temperature and seed entirely, so repeated calls are
    identical by construction. Unmatched prompts complete to "no"; unmatched
    QA requests report no answer.
    """

    generate_model_id = "mock-generate"
    qa_model_id = "mock-qa"

    def __init__(self, rules: list[MockRule] | None = None, default: str = "no"):
        self.rules = list(rules or [])
        self.default = default

    def generate(self, prompt, n, max_new_tokens, temperature, seed=None) -> list[str]:
        completions = (self.default,)
        for rule in self.rules:
            if rule.completions and rule.match in prompt:
                completions = rule.completions
                break
        return [completions[i % len(completions)] for i in range(n)]

    def qa(self, question, context) -> tuple[str, float | None, bool]:
        for rule in self.rules:
            if rule.answer is not None and (
                rule.match in question or rule.match in context
            ):
                return rule.answer, rule.score, False
        return "", None, True


class TransformersBackend:
    """Local transformer models behind the same interface.

    Models load lazily on first use and calls are serialized: the service
    stays responsive for health checks while a slow CPU generation runs.
    Temperature 0 switches to greedy decoding; a seed makes sampling
    reproducible.
    """

    def __init__(
        self,
        generate_model: str = DEFAULT_GENERATE_MODEL,
        qa_model: str = DEFAULT_QA_MODEL,
        no_answer_threshold: float = 0.0,
        device: str = "cpu",
    ):
        self.generate_model_id = generate_model
        self.qa_model_id = qa_model
        self.no_answer_threshold = no_answer_threshold
        self.device = device
        self._lock = threading.Lock()
        self._generator = None
        self._qa = None

    def _load_generator(self):
        if self._generator is None:
            from transformers import pipeline

            self._generator = pipeline(
                "text2text-generation", model=self.generate_model_id, device=self.device
            )
        return self._generator

    def _load_qa(self):
        if self._qa is None:
            from transformers import pipeline

            self._qa = pipeline(
                "question-answering", model=self.qa_model_id, device=self.device
            )
        return self._qa

    def generate(self, prompt, n, max_new_tokens, temperature, seed=None) -> list[str]:
        with self._lock:
            try:
                import torch

                generator = self._load_generator()
                if seed is not None:
                    torch.manual_seed(seed)
                kwargs = {"max_new_tokens": max_new_tokens, "num_return_sequences": n}
                if temperature > 0:
                    kwargs.update({"do_sample": True, "temperature": temperature})
                else:
                    kwargs["do_sample"] = False
                outputs = generator(prompt, **kwargs)
                return [out["generated_text"] for out in outputs]
            except Exception as exc:
                raise BackendError(f"generation failed: {exc}") from exc

    def qa(self, question, context) -> tuple[str, float | None, bool]:
        with self._lock:
            try:
                qa = self._load_qa()
                result = qa(
                    question=question, context=context, handle_impossible_answer=True
                )
                answer = result.get("answer", "") or ""
                score = float(result.get("score", 0.0))
                if not answer.strip() or score < self.no_answer_threshold:
                    return "", None, True
                return answer, score, False
            except Exception as exc:
                raise BackendError(f"qa failed: {exc}") from exc
