"""Candidate cause-effect pair extraction from corpus documents.

Two extractors: a lexical connective-pattern baseline, and a question-driven
pipeline that turns seed concept labels into causal questions answered by an
extractive QA backend (the answer span plus the label used form the pair,
with the seed side already linked).
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from typing import Iterable, NamedTuple, Sequence

from .corpus import Document
from .kg import ConceptRef

EFFECT_QUESTION = "What does {label} lead to?"
CAUSE_QUESTION = "What causes {label}?"

DEFAULT_PATTERN_TEMPLATES = [
    "{cause} causes {effect}",
    "{cause} caused {effect}",
    "{cause} causes of {effect}",
    "{cause} leads to {effect}",
    "{cause} led to {effect}",
    "{cause} results in {effect}",
    "{cause} resulted in {effect}",
    "{effect} due to {cause}",
    "{effect} caused by {cause}",
]

PATTERN_SCORE = 0.5

_DETERMINERS = {"the", "a", "an"}
_SPAN_PUNCT = "\"'“”‘’«»()[]{}.,;:!?…"


class ExtractionError(RuntimeError):
    """Extraction could not proceed (bad scope, backend failure)."""


@dataclass(frozen=True)
class CandidatePair:
    cause_phrase: str
    effect_phrase: str
    seed_qid: str | None
    document_id: str
    evidence_text: str
    method: str  # "pattern" | "qal-cause" | "qal-effect"
    score: float

    def __post_init__(self):
        if not self.cause_phrase.strip() or not self.effect_phrase.strip():
            raise ExtractionError("candidate pair has an empty phrase")
        if (
            self.cause_phrase not in self.evidence_text
            and self.effect_phrase not in self.evidence_text
        ):
            raise ExtractionError("evidence text contains neither phrase")
        if not 0.0 <= self.score <= 1.0:
            raise ExtractionError(f"score {self.score} outside [0,1]")


@dataclass(frozen=True)
class QaRequest:
    question: str
    context: str


@dataclass(frozen=True)
class QaAnswer:
    text: str
    score: float | None = None
    no_answer: bool = False

    def __post_init__(self):
        if self.no_answer and self.text:
            raise ExtractionError("no_answer response carries answer text")
        if not self.no_answer and self.score is None:
            raise ExtractionError("answer without a score")
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ExtractionError(f"QA score {self.score} outside [0,1]")


class GeneratedQuestion(NamedTuple):
    question: str
    direction: str  # "effect_of_seed" | "cause_of_seed"
    label_used: str


def generate_questions(seed: ConceptRef) -> list[GeneratedQuestion]:
    """Both question templates for every label, effect question first."""
    questions = []
    for label in seed.labels:
        questions.append(
            GeneratedQuestion(EFFECT_QUESTION.format(label=label), "effect_of_seed", label)
        )
        questions.append(
            GeneratedQuestion(CAUSE_QUESTION.format(label=label), "cause_of_seed", label)
        )
    return questions


def write_pairs(path, pairs: Iterable[CandidatePair]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(asdict(pair), ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def read_pairs(path) -> list[CandidatePair]:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                pairs.append(CandidatePair(**obj))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ExtractionError(f"pairs line {line_no}: {exc}") from exc
    return pairs


def dedupe_pairs(pairs: Iterable[CandidatePair]) -> list[CandidatePair]:
    """Drop duplicate (cause, effect, document) pairs, keeping the best score."""
    best: dict[tuple[str, str, str], CandidatePair] = {}
    for pair in pairs:
        key = (pair.cause_phrase, pair.effect_phrase, pair.document_id)
        kept = best.get(key)
        if kept is None or pair.score > kept.score:
            best[key] = pair
    return list(best.values())


def _scope_contexts(doc: Document, scope: str) -> list[str]:
    if scope == "first_section":
        return [doc.first_section] if doc.first_section.strip() else []
    if scope == "full_text":
        return [p for p in doc.text.split("\n\n") if p.strip()]
    raise ExtractionError(f"unknown scope {scope!r}")


def _ask(qa, request: QaRequest, retries: int) -> QaAnswer:
    last_exc = None
    for _ in range(retries + 1):
        try:
            return qa.answer(request)
        except Exception as exc:  # backend failures only; answers never raise
            last_exc = exc
    raise ExtractionError(
        f"QA backend failed for question {request.question!r}"
    ) from last_exc


def extract_qal(
    doc: Document,
    seed: ConceptRef,
    scope: str,
    qa,
    min_score: float = 0.5,
    retries: int = 2,
) -> list[CandidatePair]:
    """Ask the generated causal questions against the document scope.

    ``full_text`` is split into paragraphs on blank lines and each paragraph
    is queried independently; ``first_section`` is queried whole. Answers
    flagged no-answer or scoring below ``min_score`` are discarded.
    """
    if doc.is_redirect:
        raise ExtractionError(f"document {doc.id} is a redirect")
    contexts = _scope_contexts(doc, scope)
    pairs = []
    for question in generate_questions(seed):
        for context in contexts:
            try:
                answer = _ask(qa, QaRequest(question.question, context), retries)
            except ExtractionError as exc:
                raise ExtractionError(f"{exc} (document {doc.id})") from exc
            if answer.no_answer or not answer.text.strip():
                continue
            if answer.score < min_score:
                continue
            span = answer.text.strip()
            if question.direction == "effect_of_seed":
                cause, effect, method = question.label_used, span, "qal-effect"
            else:
                cause, effect, method = span, question.label_used, "qal-cause"
            pairs.append(
                CandidatePair(
                    cause_phrase=cause,
                    effect_phrase=effect,
                    seed_qid=seed.qid,
                    document_id=doc.id,
                    evidence_text=context,
                    method=method,
                    score=answer.score,
                )
            )
    return dedupe_pairs(pairs)


class _CompiledPattern(NamedTuple):
    connective: str
    regex: re.Pattern
    cause_first: bool


def compile_patterns(templates: Sequence[str] | None = None) -> list[_CompiledPattern]:
    compiled = []
    for template in templates or DEFAULT_PATTERN_TEMPLATES:
        cause_pos = template.find("{cause}")
        effect_pos = template.find("{effect}")
        if cause_pos < 0 or effect_pos < 0:
            raise ExtractionError(
                f"pattern template {template!r} needs both {{cause}} and {{effect}}"
            )
        connective = (
            template.replace("{cause}", "").replace("{effect}", "").strip()
        )
        if not connective:
            raise ExtractionError(f"pattern template {template!r} has no connective")
        compiled.append(
            _CompiledPattern(
                connective=connective,
                regex=re.compile(
                    r"\b" + re.escape(connective) + r"\b", re.IGNORECASE
                ),
                cause_first=cause_pos < effect_pos,
            )
        )
    return compiled


def split_sentences(text: str) -> list[str]:
    sentences = []
    for line in text.split("\n"):
        for sentence in re.split(r"(?<=[.!?])\s+", line):
            if sentence.strip():
                sentences.append(sentence.strip())
    return sentences


def _trim_span(span: str) -> str:
    span = span.strip().strip(_SPAN_PUNCT).strip()
    while True:
        first, _, rest = span.partition(" ")
        if first.lower() in _DETERMINERS and rest:
            span = rest.lstrip()
        else:
            break
    return span.strip().strip(_SPAN_PUNCT).strip()


def _connective_matches(sentence: str, patterns: list[_CompiledPattern]):
    """Non-overlapping connective matches, longest connective wins per position."""
    candidates = []
    for pattern in patterns:
        for match in pattern.regex.finditer(sentence):
            candidates.append((match.start(), -len(match.group(0)), match.end(), pattern))
    candidates.sort(key=lambda item: item[:3])
    accepted = []
    covered_until = -1
    for start, _, end, pattern in candidates:
        if start <= covered_until:
            continue
        accepted.append((start, end, pattern))
        covered_until = end - 1
    return accepted


def extract_patterns(
    doc: Document,
    scope: str = "full_text",
    templates: Sequence[str] | None = None,
) -> list[CandidatePair]:
    """Lexical baseline: connective patterns over sentences.

    Capture spans are bounded by the sentence edges, the connective, commas
    and semicolons, then trimmed of surrounding punctuation and leading
    determiners. Fixed score; both endpoints left unlinked.
    """
    patterns = compile_patterns(templates)
    contexts = _scope_contexts(doc, scope)
    pairs = []
    for context in contexts:
        for sentence in split_sentences(context):
            for start, end, pattern in _connective_matches(sentence, patterns):
                left = re.split(r"[,;]", sentence[:start])[-1]
                right = re.split(r"[,;]", sentence[end:])[0]
                left_span = _trim_span(left)
                right_span = _trim_span(right)
                if not left_span or not right_span:
                    continue
                if pattern.cause_first:
                    cause, effect = left_span, right_span
                else:
                    cause, effect = right_span, left_span
                pairs.append(
                    CandidatePair(
                        cause_phrase=cause,
                        effect_phrase=effect,
                        seed_qid=None,
                        document_id=doc.id,
                        evidence_text=sentence,
                        method="pattern",
                        score=PATTERN_SCORE,
                    )
                )
    return dedupe_pairs(pairs)
