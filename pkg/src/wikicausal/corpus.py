"""Document corpus: schema, JSONL reader, validation, and summary statistics.

The corpus is a UTF-8 JSONL file, one JSON object per line, with the fields
``id``, ``title``, ``url``, ``document_concept``, ``text``, ``first_section``,
``categories``, ``infobox``, ``headings``, ``event_concepts``, ``timelines``.
Unknown fields are preserved on round trip but ignored by all logic.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator
from urllib.parse import urlparse

QID_RE = re.compile(r"^Q[0-9]+$")

CORPUS_FIELDS = (
    "id",
    "title",
    "url",
    "document_concept",
    "text",
    "first_section",
    "categories",
    "infobox",
    "headings",
    "event_concepts",
    "timelines",
)


class CorpusFormatError(ValueError):
    """A corpus line or record does not match the expected schema."""


@dataclass(frozen=True)
class ConceptBinding:
    """The Wikidata concept a document is bound to."""

    qid: str
    labels: tuple[str, ...]


@dataclass
class Document:
    """One corpus record: a Wikipedia article plus its concept bindings."""

    id: str
    title: str
    url: str
    document_concept: ConceptBinding
    text: str
    first_section: str
    categories: list[str] = field(default_factory=list)
    infobox: dict[str, str] = field(default_factory=dict)
    headings: list[str] = field(default_factory=list)
    event_concepts: list[str] = field(default_factory=list)
    timelines: list[str] = field(default_factory=list)
    is_redirect: bool = False
    extra: dict = field(default_factory=dict)


def _require(obj: dict, key: str, types: tuple, where: str):
    if key not in obj:
        raise CorpusFormatError(f"{where}: missing field '{key}'")
    value = obj[key]
    if not isinstance(value, types):
        raise CorpusFormatError(
            f"{where}: field '{key}' has type {type(value).__name__}"
        )
    return value


def _string_list(obj: dict, key: str, where: str) -> list[str]:
    values = _require(obj, key, (list,), where)
    return [v if isinstance(v, str) else _stringify(v) for v in values]


def _stringify(value) -> str:
    """Canonical string form for non-string JSON values (nested infobox data)."""
    if isinstance(value, str):
        return value
    return json.dumps(value, ensure_ascii=False, sort_keys=True)


def parse_document(obj: dict, where: str = "document") -> Document:
    """Build a Document from a decoded JSON object.

    Structural problems (missing fields, wrong types) raise
    CorpusFormatError; invariant violations do not (see validate_document).
    """
    if not isinstance(obj, dict):
        raise CorpusFormatError(f"{where}: not a JSON object")
    concept_obj = _require(obj, "document_concept", (dict,), where)
    qid = _require(concept_obj, "qid", (str,), f"{where}.document_concept")
    labels = _string_list(concept_obj, "labels", f"{where}.document_concept")
    infobox_obj = _require(obj, "infobox", (dict,), where)
    infobox = {str(k): _stringify(v) for k, v in infobox_obj.items()}
    extra = {k: v for k, v in obj.items() if k not in CORPUS_FIELDS and k != "is_redirect"}
    return Document(
        id=_require(obj, "id", (str,), where),
        title=_require(obj, "title", (str,), where),
        url=_require(obj, "url", (str,), where),
        document_concept=ConceptBinding(qid=qid, labels=tuple(labels)),
        text=_require(obj, "text", (str,), where),
        first_section=_require(obj, "first_section", (str,), where),
        categories=_string_list(obj, "categories", where),
        infobox=infobox,
        headings=_string_list(obj, "headings", where),
        event_concepts=_string_list(obj, "event_concepts", where),
        timelines=_string_list(obj, "timelines", where),
        is_redirect=bool(obj.get("is_redirect", False)),
        extra=extra,
    )


def document_to_dict(doc: Document) -> dict:
    out = {
        "id": doc.id,
        "title": doc.title,
        "url": doc.url,
        "document_concept": {
            "qid": doc.document_concept.qid,
            "labels": list(doc.document_concept.labels),
        },
        "text": doc.text,
        "first_section": doc.first_section,
        "categories": list(doc.categories),
        "infobox": dict(doc.infobox),
        "headings": list(doc.headings),
        "event_concepts": list(doc.event_concepts),
        "timelines": list(doc.timelines),
        "is_redirect": doc.is_redirect,
    }
    out.update(doc.extra)
    return out


def serialize_document(doc: Document) -> str:
    return json.dumps(document_to_dict(doc), ensure_ascii=False)


def write_corpus(path, docs: Iterable[Document]) -> int:
    """Write documents as JSONL; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(serialize_document(doc))
            fh.write("\n")
            count += 1
    return count


class CorpusReader:
    """Streaming JSONL reader.

    With ``on_error="fail"`` a malformed line raises CorpusFormatError naming
    the line number. With ``on_error="skip"`` malformed lines are counted in
    ``skipped`` and valid documents are still yielded; when ``validate=True``
    documents violating the schema invariants are skipped and counted too.
    """

    def __init__(self, path, on_error: str = "fail", validate: bool = False):
        if on_error not in ("fail", "skip"):
            raise ValueError(f"unknown on_error policy: {on_error!r}")
        self.path = path
        self.on_error = on_error
        self.validate = validate
        self.skipped: list[tuple[int, str]] = []
        self.yielded = 0

    @property
    def skipped_count(self) -> int:
        return len(self.skipped)

    def _problem(self, line_no: int, message: str):
        if self.on_error == "fail":
            raise CorpusFormatError(message)
        self.skipped.append((line_no, message))

    def __iter__(self) -> Iterator[Document]:
        with open(self.path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    doc = parse_document(obj, where=f"line {line_no}")
                except CorpusFormatError as exc:
                    self._problem(line_no, str(exc))
                    continue
                except json.JSONDecodeError as exc:
                    self._problem(line_no, f"line {line_no}: {exc}")
                    continue
                if self.validate:
                    violations = validate_document(doc)
                    if violations:
                        self._problem(
                            line_no, f"line {line_no}: " + "; ".join(violations)
                        )
                        continue
                self.yielded += 1
                yield doc


def read_corpus(path, on_error: str = "fail", validate: bool = False) -> CorpusReader:
    """Open a corpus file for streaming. See CorpusReader for the policies."""
    return CorpusReader(path, on_error=on_error, validate=validate)


def validate_document(doc: Document) -> list[str]:
    """Check the document invariants; returns one description per violation."""
    violations = []
    for name in ("id", "title", "url"):
        if not getattr(doc, name):
            violations.append(f"{name}: must be non-empty")
    if doc.url:
        parsed = urlparse(doc.url)
        if not (parsed.scheme and parsed.netloc):
            violations.append(f"url: {doc.url!r} does not parse as an absolute URL")
    if not QID_RE.match(doc.document_concept.qid):
        violations.append(
            f"document_concept.qid: {doc.document_concept.qid!r} does not match Q[0-9]+"
        )
    if not doc.document_concept.labels:
        violations.append("document_concept.labels: must be non-empty")
    if not doc.is_redirect:
        if not doc.text:
            violations.append("text: must be non-empty for non-redirect documents")
        if len(doc.first_section) > len(doc.text):
            violations.append("first_section: longer than text")
    for i, qid in enumerate(doc.event_concepts):
        if not QID_RE.match(qid):
            violations.append(f"event_concepts[{i}]: {qid!r} does not match Q[0-9]+")
    if len(set(doc.event_concepts)) != len(doc.event_concepts):
        violations.append("event_concepts: contains duplicates")
    return violations


@dataclass(frozen=True)
class CorpusStats:
    article_count: int
    text_page_count: int
    redirect_count: int
    unique_document_concepts: int
    avg_text_len: float
    avg_first_section_len: float
    avg_event_concepts_per_article: float


class StatsAccumulator:
    """Associative fold over documents; mergeable for parallel computation."""

    def __init__(self):
        self.article_count = 0
        self.redirect_count = 0
        self.concept_qids: set[str] = set()
        self.text_len_sum = 0
        self.first_section_len_sum = 0
        self.event_concept_sum = 0

    def update(self, doc: Document):
        self.article_count += 1
        self.concept_qids.add(doc.document_concept.qid)
        if doc.is_redirect:
            self.redirect_count += 1
        else:
            self.text_len_sum += len(doc.text)
            self.first_section_len_sum += len(doc.first_section)
            self.event_concept_sum += len(doc.event_concepts)

    def merge(self, other: "StatsAccumulator") -> "StatsAccumulator":
        merged = StatsAccumulator()
        merged.article_count = self.article_count + other.article_count
        merged.redirect_count = self.redirect_count + other.redirect_count
        merged.concept_qids = self.concept_qids | other.concept_qids
        merged.text_len_sum = self.text_len_sum + other.text_len_sum
        merged.first_section_len_sum = (
            self.first_section_len_sum + other.first_section_len_sum
        )
        merged.event_concept_sum = self.event_concept_sum + other.event_concept_sum
        return merged

    def finish(self) -> CorpusStats:
        text_pages = self.article_count - self.redirect_count
        return CorpusStats(
            article_count=self.article_count,
            text_page_count=text_pages,
            redirect_count=self.redirect_count,
            unique_document_concepts=len(self.concept_qids),
            avg_text_len=self.text_len_sum / text_pages if text_pages else 0.0,
            avg_first_section_len=(
                self.first_section_len_sum / text_pages if text_pages else 0.0
            ),
            avg_event_concepts_per_article=(
                self.event_concept_sum / text_pages if text_pages else 0.0
            ),
        )


def corpus_stats(docs: Iterable[Document]) -> CorpusStats:
    """Counts over all documents; averages over non-redirect pages, in characters."""
    acc = StatsAccumulator()
    for doc in docs:
        acc.update(doc)
    return acc.finish()
