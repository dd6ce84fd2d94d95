"""Deterministic label/alias linking of cause-effect phrases to concepts.

Exact normalized match against an immutable index built from the concept
inventory. Collisions resolve by a total tie-break: label beats alias,
class beats instance, then lowest numeric qid. The interface takes an
optional context argument, reserved for context-sensitive linkers; the
baseline ignores it.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .extractor import CandidatePair
from .kg import (
    CLASS,
    CausalEdge,
    ConceptRef,
    Endpoint,
    Provenance,
    linked,
    unlinked,
)

_DETERMINERS = ("the", "a", "an")

# dropped from the end of an over-long phrase on the single retry lookup
TRAILING_PREPOSITIONS = frozenset(
    ["in", "of", "on", "at", "during", "for", "from", "to", "with", "by", "after", "before"]
)


def _strip_outer_punct(s: str) -> str:
    start, end = 0, len(s)
    while start < end and unicodedata.category(s[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(s[end - 1]).startswith("P"):
        end -= 1
    return s[start:end]


def normalize(phrase: str) -> str:
    """NFKC, lowercase, collapsed whitespace, outer punctuation and leading
    determiners stripped. Idempotent."""
    s = unicodedata.normalize("NFKC", phrase).lower()
    s = re.sub(r"\s+", " ", s).strip()
    while True:
        before = s
        s = _strip_outer_punct(s).strip()
        for determiner in _DETERMINERS:
            if s == determiner:
                s = ""
            elif s.startswith(determiner + " "):
                s = s[len(determiner) + 1 :].lstrip()
        if s == before:
            return s


class IndexEntry(NamedTuple):
    qid: str
    kind: str
    source: str  # "label" | "alias"


def _tie_break(entry: IndexEntry) -> tuple[int, int, int]:
    return (
        0 if entry.source == "label" else 1,
        0 if entry.kind == CLASS else 1,
        int(entry.qid[1:]),
    )


class LabelIndex:
    """Normalized label/alias -> concept candidates, immutable after build."""

    def __init__(self, entries: dict[str, list[IndexEntry]]):
        self._entries = entries

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def candidates(self, key: str) -> list[IndexEntry]:
        return list(self._entries.get(key, ()))

    def lookup(self, phrase: str, context: str | None = None) -> str | None:
        """Best-matching qid for a phrase, or None. ``context`` is reserved
        for pluggable context-sensitive linkers and is ignored here."""
        key = normalize(phrase)
        if not key:
            return None
        entries = self._entries.get(key)
        if entries:
            return entries[0].qid
        retry = _drop_prepositional_tail(key)
        if retry is not None:
            entries = self._entries.get(retry)
            if entries:
                return entries[0].qid
        return None


def _drop_prepositional_tail(key: str) -> str | None:
    tokens = key.split(" ")
    if len(tokens) < 2:
        return None
    for i in range(len(tokens) - 1, 0, -1):
        if tokens[i] in TRAILING_PREPOSITIONS:
            head = " ".join(tokens[:i]).strip()
            return head or None
    return None


def build_index(concepts: Iterable[ConceptRef]) -> LabelIndex:
    raw: dict[str, dict[str, IndexEntry]] = {}
    for concept in concepts:
        for source, texts in (("label", concept.labels), ("alias", concept.aliases)):
            for text in texts:
                key = normalize(text)
                if not key:
                    continue
                entry = IndexEntry(qid=concept.qid, kind=concept.kind, source=source)
                per_key = raw.setdefault(key, {})
                kept = per_key.get(concept.qid)
                if kept is None or _tie_break(entry) < _tie_break(kept):
                    per_key[concept.qid] = entry
    return LabelIndex(
        {
            key: sorted(per_key.values(), key=_tie_break)
            for key, per_key in raw.items()
        }
    )


@dataclass(frozen=True)
class UnlinkedEntry:
    phrase: str
    document_id: str
    method: str


@dataclass(frozen=True)
class LinkResult:
    edge: CausalEdge
    unlinked: tuple[UnlinkedEntry, ...] = ()

    @property
    def fully_linked(self) -> bool:
        return self.edge.is_fully_linked


def _seed_side(pair: CandidatePair) -> str | None:
    # the QAL seed is the question label: the cause for effect-direction
    # questions, the effect for cause-direction ones
    if pair.seed_qid is None:
        return None
    if pair.method == "qal-effect":
        return "cause"
    if pair.method == "qal-cause":
        return "effect"
    return None


def link_pair(pair: CandidatePair, index: LabelIndex) -> LinkResult:
    """Bind the pair's free phrase(s) to concepts by exact normalized match.

    Seed endpoints pass through unchanged; phrases and provenance are never
    altered. Unresolved phrases stay as phrase endpoints and are reported.
    A free phrase resolving to the seed's own concept is left unlinked
    rather than forming a self-loop.
    """
    seed_side = _seed_side(pair)
    unlinked_entries: list[UnlinkedEntry] = []
    endpoints: dict[str, Endpoint] = {}
    taken: set[str] = set()
    if seed_side is not None:
        endpoints[seed_side] = linked(pair.seed_qid)
        taken.add(pair.seed_qid)
    for side, phrase in (("cause", pair.cause_phrase), ("effect", pair.effect_phrase)):
        if side in endpoints:
            continue
        qid = index.lookup(phrase, context=pair.evidence_text)
        if qid is not None and qid not in taken:
            endpoints[side] = linked(qid)
            taken.add(qid)
        else:
            endpoints[side] = unlinked(phrase)
            unlinked_entries.append(
                UnlinkedEntry(phrase=phrase, document_id=pair.document_id, method=pair.method)
            )
    provenance = Provenance(
        document_id=pair.document_id,
        evidence_text=pair.evidence_text,
        extractor_name=pair.method,
        score=pair.score,
    )
    edge = CausalEdge(
        cause=endpoints["cause"],
        effect=endpoints["effect"],
        provenance=(provenance,),
    )
    return LinkResult(edge=edge, unlinked=tuple(unlinked_entries))


def render_unlinked_report(entries: Iterable[UnlinkedEntry]) -> str:
    """TSV: phrase, document id, extraction method."""
    lines = [f"{e.phrase}\t{e.document_id}\t{e.method}" for e in entries]
    return "\n".join(lines) + ("\n" if lines else "")
