"""Assemble the document corpus from Wikidata concept exports and raw wikitext pages.

The Wikidata queries themselves (event classes linked from Wikinews, their
instances, sitelinks) run offline; this module consumes their JSONL exports.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Iterator
from urllib.parse import quote

from .corpus import ConceptBinding, CorpusFormatError, Document
from .wikitext import wikitext_to_plaintext

OCCURRENCE_ROOT = "Q1190554"

WIKIPEDIA_URL_PREFIX = "https://en.wikipedia.org/wiki/"


class CorpusBuildError(ValueError):
    """Raised for inconsistent build inputs (duplicate ids, bad exports)."""


@dataclass(frozen=True)
class RawPage:
    page_id: str
    title: str
    wikitext: str
    redirect_target: str | None = None

    @property
    def is_redirect(self) -> bool:
        return bool(self.redirect_target)


@dataclass(frozen=True)
class ConceptExport:
    """One exported Wikidata concept row.

    ``superclasses`` carries the superclass closure for classes and the
    class memberships for instances.
    """

    qid: str
    kind: str  # "class" | "instance"
    labels: tuple[str, ...] = ()
    aliases: tuple[str, ...] = ()
    superclasses: tuple[str, ...] = ()
    sitelink_title: str | None = None


def read_concept_exports(path) -> list[ConceptExport]:
    exports = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {line_no}: {exc}") from exc
            exports.append(
                ConceptExport(
                    qid=obj["qid"],
                    kind=obj["kind"],
                    labels=tuple(obj.get("labels", [])),
                    aliases=tuple(obj.get("aliases", [])),
                    superclasses=tuple(obj.get("superclasses", [])),
                    sitelink_title=obj.get("sitelink_title"),
                )
            )
    return exports


def read_raw_pages(path) -> Iterator[RawPage]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {line_no}: {exc}") from exc
            yield RawPage(
                page_id=obj["page_id"],
                title=obj["title"],
                wikitext=obj.get("wikitext", ""),
                redirect_target=obj.get("redirect_target"),
            )


@dataclass
class CurationList:
    """Manual allow/deny verification list: one qid per line, ``-`` prefix denies."""

    allow: set[str] = field(default_factory=set)
    deny: set[str] = field(default_factory=set)

    @classmethod
    def from_file(cls, path) -> "CurationList":
        allow, deny = set(), set()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                entry = line.strip()
                if not entry:
                    continue
                if entry.startswith("-"):
                    deny.add(entry[1:].strip())
                else:
                    allow.add(entry)
        return cls(allow=allow, deny=deny)


def _qid_sort_key(qid: str) -> int:
    return int(qid[1:]) if qid[1:].isdigit() else 0


def select_event_classes(
    candidates: list[ConceptExport],
    occurrence_root: str = OCCURRENCE_ROOT,
    curation: CurationList | None = None,
) -> list[ConceptExport]:
    """Filter candidate classes to those under the occurrence root.

    Candidates come pre-filtered to Wikinews-linked concepts; each carries its
    superclass closure. The curation list is applied last: denied qids are
    dropped, allowed qids are kept even without the root in their closure.
    """
    by_qid: dict[str, ConceptExport] = {}
    for candidate in candidates:
        by_qid.setdefault(candidate.qid, candidate)
    selected = {
        qid for qid, c in by_qid.items() if occurrence_root in c.superclasses
    }
    if curation is not None:
        selected |= curation.allow & set(by_qid)
        selected -= curation.deny
    return [by_qid[qid] for qid in sorted(selected, key=_qid_sort_key)]


def normalize_title(title: str) -> str:
    """Wikipedia title matching: NFC, underscores to spaces, first char folded."""
    t = unicodedata.normalize("NFC", title).replace("_", " ").strip()
    return t[:1].lower() + t[1:] if t else t


def build_concept_index(exports: Iterable[ConceptExport]) -> dict[str, ConceptExport]:
    index: dict[str, ConceptExport] = {}
    for export in exports:
        if not export.sitelink_title:
            continue
        key = normalize_title(export.sitelink_title)
        if key in index and index[key].qid != export.qid:
            raise CorpusBuildError(
                f"sitelink title {export.sitelink_title!r} maps to both "
                f"{index[key].qid} and {export.qid}"
            )
        index[key] = export
    return index


def build_class_map(
    exports: Iterable[ConceptExport], seed_class_qids: set[str]
) -> dict[str, list[str]]:
    """Instance qid -> ordered event classes it belongs to (seed classes only)."""
    class_map: dict[str, list[str]] = {}
    for export in exports:
        if export.kind != "instance":
            continue
        seen = []
        for qid in export.superclasses:
            if qid in seed_class_qids and qid not in seen:
                seen.append(qid)
        class_map[export.qid] = seen
    return class_map


def page_url(title: str) -> str:
    return WIKIPEDIA_URL_PREFIX + quote(title.replace(" ", "_"), safe="_-.()',:!")


class DocumentBuilder:
    """Streams Documents out of raw pages; pages without a matching concept
    are dropped and counted in ``dropped_count``."""

    def __init__(
        self,
        pages: Iterable[RawPage],
        concept_index: dict[str, ConceptExport],
        class_map: dict[str, list[str]],
    ):
        self.pages = pages
        self.concept_index = concept_index
        self.class_map = class_map
        self.dropped_count = 0
        self.built_count = 0
        self._seen_ids: set[str] = set()

    def __iter__(self) -> Iterator[Document]:
        for page in self.pages:
            if page.page_id in self._seen_ids:
                raise CorpusBuildError(f"duplicate page_id {page.page_id!r}")
            self._seen_ids.add(page.page_id)
            concept = self.concept_index.get(normalize_title(page.title))
            if concept is None:
                self.dropped_count += 1
                continue
            self.built_count += 1
            yield self._to_document(page, concept)

    def _to_document(self, page: RawPage, concept: ConceptExport) -> Document:
        labels = concept.labels or (page.title,)
        event_concepts = list(self.class_map.get(concept.qid, []))
        if page.is_redirect:
            parsed = None
        else:
            parsed = wikitext_to_plaintext(page.wikitext)
        return Document(
            id=page.page_id,
            title=page.title,
            url=page_url(page.title),
            document_concept=ConceptBinding(qid=concept.qid, labels=tuple(labels)),
            text=parsed.text if parsed else "",
            first_section=parsed.first_section if parsed else "",
            categories=parsed.categories if parsed else [],
            infobox=parsed.infobox if parsed else {},
            headings=parsed.headings if parsed else [],
            event_concepts=event_concepts,
            timelines=parsed.timelines if parsed else [],
            is_redirect=page.is_redirect,
        )


def build_documents(
    pages: Iterable[RawPage],
    concept_index: dict[str, ConceptExport],
    class_map: dict[str, list[str]],
) -> DocumentBuilder:
    return DocumentBuilder(pages, concept_index, class_map)
