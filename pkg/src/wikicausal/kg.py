"""Concepts, causal edges, and knowledge graphs.

A CausalKG is a named, deduplicated set of directed cause->effect edges.
Endpoints are either linked Wikidata concepts (qid) or raw phrases left by
the extractor. The Base KG is built from exported Wikidata causal relations
over the seed event classes and their instances.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

QID_RE = re.compile(r"^Q[0-9]+$")

# Wikidata causal statement properties and their orientation: for the
# "effect_of_subject" group the statement subject is the cause, for the
# "cause_of_subject" group the subject is the effect and the pair is reversed.
DEFAULT_CAUSAL_PROPERTIES: dict[str, str] = {
    "P1542": "effect_of_subject",  # has effect
    "P1536": "effect_of_subject",  # immediate cause of
    "P828": "cause_of_subject",  # has cause
    "P1478": "cause_of_subject",  # has immediate cause
}

CLASS = "class"
INSTANCE = "instance"


class KgError(ValueError):
    """Inconsistent KG inputs: unknown qids, bad endpoints, bad files."""


@dataclass(frozen=True)
class ConceptRef:
    qid: str
    kind: str  # CLASS | INSTANCE
    labels: tuple[str, ...]
    aliases: tuple[str, ...] = ()

    def __post_init__(self):
        if not QID_RE.match(self.qid):
            raise KgError(f"bad qid {self.qid!r}")
        if self.kind not in (CLASS, INSTANCE):
            raise KgError(f"bad concept kind {self.kind!r} for {self.qid}")
        if not self.labels:
            raise KgError(f"concept {self.qid} has no labels")

    @property
    def preferred_label(self) -> str:
        return self.labels[0]


class ConceptInventory:
    """Immutable qid -> ConceptRef lookup shared across modules."""

    def __init__(self, concepts: Iterable[ConceptRef]):
        self._by_qid: dict[str, ConceptRef] = {}
        for concept in concepts:
            existing = self._by_qid.get(concept.qid)
            if existing is not None and existing != concept:
                raise KgError(f"conflicting inventory entries for {concept.qid}")
            self._by_qid[concept.qid] = concept

    def __contains__(self, qid: str) -> bool:
        return qid in self._by_qid

    def __iter__(self) -> Iterator[ConceptRef]:
        return iter(self._by_qid.values())

    def __len__(self) -> int:
        return len(self._by_qid)

    def get(self, qid: str) -> ConceptRef:
        try:
            return self._by_qid[qid]
        except KeyError:
            raise KgError(f"qid {qid} not in concept inventory") from None

    def kind(self, qid: str) -> str:
        return self.get(qid).kind

    def label(self, qid: str) -> str:
        return self.get(qid).preferred_label


def load_inventory(path) -> ConceptInventory:
    """Read the concept export JSONL (qid, kind, labels, aliases) as an inventory."""
    concepts = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise KgError(f"line {line_no}: {exc}") from exc
            labels = tuple(obj.get("labels") or ())
            concepts.append(
                ConceptRef(
                    qid=obj["qid"],
                    kind=obj["kind"],
                    labels=labels or (obj["qid"],),
                    aliases=tuple(obj.get("aliases") or ()),
                )
            )
    return ConceptInventory(concepts)


@dataclass(frozen=True)
class Endpoint:
    """Either a linked concept (qid) or a raw phrase, never both."""

    qid: str | None = None
    phrase: str | None = None

    def __post_init__(self):
        if (self.qid is None) == (self.phrase is None):
            raise KgError("endpoint needs exactly one of qid or phrase")
        if self.qid is not None and not QID_RE.match(self.qid):
            raise KgError(f"bad endpoint qid {self.qid!r}")
        if self.phrase is not None and not self.phrase.strip():
            raise KgError("endpoint phrase is empty")

    @property
    def is_linked(self) -> bool:
        return self.qid is not None

    def key(self) -> tuple[str, str]:
        return ("q", self.qid) if self.qid is not None else ("p", self.phrase)


def linked(qid: str) -> Endpoint:
    return Endpoint(qid=qid)


def unlinked(phrase: str) -> Endpoint:
    return Endpoint(phrase=phrase)


@dataclass(frozen=True)
class Provenance:
    document_id: str
    evidence_text: str
    extractor_name: str
    score: float

    def __post_init__(self):
        if not self.evidence_text:
            raise KgError("provenance evidence_text is empty")
        if not 0.0 <= self.score <= 1.0:
            raise KgError(f"provenance score {self.score} outside [0,1]")


@dataclass(frozen=True)
class CausalEdge:
    cause: Endpoint
    effect: Endpoint
    provenance: tuple[Provenance, ...] = ()

    def __post_init__(self):
        if (
            self.cause.is_linked
            and self.effect.is_linked
            and self.cause.qid == self.effect.qid
        ):
            raise KgError(f"self-loop edge on {self.cause.qid}")

    @property
    def is_fully_linked(self) -> bool:
        return self.cause.is_linked and self.effect.is_linked

    def pair_key(self) -> tuple:
        return (self.cause.key(), self.effect.key())


class CausalKG:
    """Named edge set; duplicate (cause, effect) pairs merge their provenance."""

    def __init__(self, name: str, edges: Iterable[CausalEdge] = (), version: str = "v0"):
        if not name:
            raise KgError("KG name must be non-empty")
        self.name = name
        self.version = version
        self._edges: dict[tuple, CausalEdge] = {}
        for edge in edges:
            self._add(edge)

    def _add(self, edge: CausalEdge):
        key = edge.pair_key()
        existing = self._edges.get(key)
        if existing is None:
            self._edges[key] = edge
        else:
            merged = list(existing.provenance)
            for prov in edge.provenance:
                if prov not in merged:
                    merged.append(prov)
            self._edges[key] = CausalEdge(
                cause=existing.cause,
                effect=existing.effect,
                provenance=tuple(merged),
            )

    @property
    def edges(self) -> list[CausalEdge]:
        return list(self._edges.values())

    def __len__(self) -> int:
        return len(self._edges)

    def __contains__(self, edge: CausalEdge) -> bool:
        return edge.pair_key() in self._edges

    def linked_pairs(self) -> set[tuple[str, str]]:
        """Deduplicated (cause qid, effect qid) pairs of fully linked edges."""
        return {
            (e.cause.qid, e.effect.qid) for e in self._edges.values() if e.is_fully_linked
        }


def read_relations_tsv(path) -> list[tuple[str, str, str]]:
    """Read the exported causal statements: subject qid, object qid, property."""
    relations = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            row = line.rstrip("\n")
            if not row.strip():
                continue
            parts = row.split("\t")
            if line_no == 1 and parts[0] in ("cause_qid", "subject_qid"):
                continue
            if len(parts) != 3:
                raise KgError(f"line {line_no}: expected 3 tab-separated fields")
            relations.append((parts[0], parts[1], parts[2]))
    return relations


def build_base_kg(
    concepts: ConceptInventory,
    relations: Iterable[tuple[str, str, str]],
    causal_properties: dict[str, str] | None = None,
    scope: set[str] | None = None,
    version: str = "v1",
) -> CausalKG:
    """Assemble the ground-truth KG from exported causal statements.

    Each relation is (statement subject, statement object, property id); the
    property decides the cause->effect orientation. Relations whose endpoints
    both fall outside ``scope`` (defaults to the whole inventory, i.e. the
    seed classes and their instances) are excluded; an endpoint missing from
    the inventory entirely is an error. Statement self-loops are dropped.
    """
    properties = (
        DEFAULT_CAUSAL_PROPERTIES if causal_properties is None else causal_properties
    )
    edges = []
    for subject, obj, prop in relations:
        if prop not in properties:
            raise KgError(f"property {prop} not in the causal-property set")
        for qid in (subject, obj):
            if qid not in concepts:
                raise KgError(
                    f"relation ({subject}, {obj}, {prop}): qid {qid} not in inventory"
                )
        if scope is not None and subject not in scope and obj not in scope:
            continue
        if subject == obj:
            continue
        orientation = properties[prop]
        cause, effect = (subject, obj) if orientation == "effect_of_subject" else (obj, subject)
        edges.append(CausalEdge(cause=linked(cause), effect=linked(effect)))
    return CausalKG(name="base-kg", edges=edges, version=version)


def partition_edges(
    kg: CausalKG, concepts: ConceptInventory
) -> tuple[set[CausalEdge], set[CausalEdge]]:
    """Split fully linked edges into (class-only, instance-including) sets."""
    class_only: set[CausalEdge] = set()
    instance_including: set[CausalEdge] = set()
    for edge in kg.edges:
        if not edge.is_fully_linked:
            continue
        kinds = {concepts.kind(edge.cause.qid), concepts.kind(edge.effect.qid)}
        if INSTANCE in kinds:
            instance_including.add(edge)
        else:
            class_only.add(edge)
    return class_only, instance_including


def merge_kgs(a: CausalKG, b: CausalKG) -> CausalKG:
    version = a.version if a.version == b.version else f"{a.version}+{b.version}"
    merged = CausalKG(name=f"{a.name}+{b.name}", edges=a.edges, version=version)
    for edge in b.edges:
        merged._add(edge)
    return merged


def _endpoint_to_dict(endpoint: Endpoint) -> dict:
    if endpoint.is_linked:
        return {"qid": endpoint.qid}
    return {"phrase": endpoint.phrase}


def _endpoint_from_dict(obj: dict) -> Endpoint:
    if "qid" in obj:
        return Endpoint(qid=obj["qid"])
    if "phrase" in obj:
        return Endpoint(phrase=obj["phrase"])
    raise KgError(f"endpoint object {obj!r} has neither qid nor phrase")


def kg_to_dict(kg: CausalKG) -> dict:
    return {
        "name": kg.name,
        "version": kg.version,
        "edges": [
            {
                "cause": _endpoint_to_dict(edge.cause),
                "effect": _endpoint_to_dict(edge.effect),
                "provenance": [
                    {
                        "document_id": p.document_id,
                        "evidence_text": p.evidence_text,
                        "extractor_name": p.extractor_name,
                        "score": p.score,
                    }
                    for p in edge.provenance
                ],
            }
            for edge in kg.edges
        ],
    }


def kg_from_dict(obj: dict) -> CausalKG:
    edges = []
    for entry in obj.get("edges", []):
        edges.append(
            CausalEdge(
                cause=_endpoint_from_dict(entry["cause"]),
                effect=_endpoint_from_dict(entry["effect"]),
                provenance=tuple(
                    Provenance(
                        document_id=p["document_id"],
                        evidence_text=p["evidence_text"],
                        extractor_name=p["extractor_name"],
                        score=p["score"],
                    )
                    for p in entry.get("provenance", [])
                ),
            )
        )
    return CausalKG(
        name=obj["name"], edges=edges, version=obj.get("version", "v0")
    )


def write_kg(path, kg: CausalKG):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(kg_to_dict(kg), fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def read_kg(path) -> CausalKG:
    with open(path, "r", encoding="utf-8") as fh:
        return kg_from_dict(json.load(fh))
