"""Recall and precision evaluation of extracted causal KGs.

Recall measures coverage of a Base KG of known causal relations; precision
probes a generative model with a yes/no question per edge, repeated an odd
number of times and majority-voted. Both are reported for three slices:
full, classes-only, and instance-including.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .kg import INSTANCE, CausalEdge, CausalKG, ConceptInventory, KgError

SLICES = ("full", "classes_only", "instance_including")

DEFAULT_PROMPT_TEMPLATE = (
    "Definition: Answer the question with a yes or no.\n"
    "Now complete the following example -\n"
    "Input: Question: Could {cause} result in {effect}? \n"
    "Output:"
)

YES = "yes"
NO = "no"
UNPARSEABLE = "unparseable"

_WORD_PUNCT = "\"'“”‘’«»()[]{}.,;:!?…"


class EvalError(ValueError):
    """Invalid evaluation inputs or configuration."""


@dataclass(frozen=True)
class SliceRecall:
    recall: float
    hit_count: int
    rel_count: int
    base_kg_size: int
    base_count: int
    base_coverage: float


@dataclass(frozen=True)
class RecallReport:
    full: SliceRecall
    classes_only: SliceRecall
    instance_including: SliceRecall

    def by_slice(self, name: str) -> SliceRecall:
        if name not in SLICES:
            raise EvalError(f"unknown slice {name!r}")
        return getattr(self, name)

    def to_dict(self) -> dict:
        return {
            name: vars(self.by_slice(name)) for name in SLICES
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RecallReport":
        return cls(**{name: SliceRecall(**obj[name]) for name in SLICES})


def _slice_of(pair: tuple[str, str], concepts: ConceptInventory) -> str:
    kinds = {concepts.kind(pair[0]), concepts.kind(pair[1])}
    return "instance_including" if INSTANCE in kinds else "classes_only"


def eval_recall(
    output: CausalKG, base: CausalKG, concepts: ConceptInventory
) -> RecallReport:
    """Six coverage measures per slice, matching on directed qid pairs.

    Output edges with a phrase endpoint are excluded from all recall
    accounting; the Base KG must be fully linked.
    """
    for edge in base.edges:
        if not edge.is_fully_linked:
            raise KgError(f"base KG {base.name} contains a non-linked edge")
    base_pairs = base.linked_pairs()
    out_pairs = output.linked_pairs()
    for pair in base_pairs | out_pairs:
        for qid in pair:
            concepts.get(qid)  # raises KgError on unresolvable endpoints

    slices = {}
    for name in SLICES:
        if name == "full":
            base_slice, out_slice = base_pairs, out_pairs
        else:
            base_slice = {p for p in base_pairs if _slice_of(p, concepts) == name}
            out_slice = {p for p in out_pairs if _slice_of(p, concepts) == name}
        hit_count = len(base_slice & out_slice)
        base_concepts = {qid for pair in base_slice for qid in pair}
        out_concepts = {qid for pair in out_slice for qid in pair}
        base_count = len(base_concepts & out_concepts)
        slices[name] = SliceRecall(
            recall=hit_count / len(base_slice) if base_slice else 0.0,
            hit_count=hit_count,
            rel_count=len(out_slice),
            base_kg_size=len(base_slice),
            base_count=base_count,
            base_coverage=base_count / len(base_concepts) if base_concepts else 0.0,
        )
    return RecallReport(**slices)


def _endpoint_text(endpoint, concepts: ConceptInventory) -> str:
    if endpoint.is_linked:
        return concepts.label(endpoint.qid)
    return endpoint.phrase


def make_prompt(
    edge: CausalEdge,
    template: str = DEFAULT_PROMPT_TEMPLATE,
    concepts: ConceptInventory | None = None,
) -> str:
    """Fill the yes/no verification prompt with the edge's endpoint texts.

    Linked endpoints use the concept's preferred label; phrase endpoints are
    used verbatim.
    """
    for placeholder in ("{cause}", "{effect}"):
        if placeholder not in template:
            raise EvalError(f"prompt template lacks the {placeholder} placeholder")
    if concepts is None:
        concepts = ConceptInventory(())
    cause = _endpoint_text(edge.cause, concepts)
    effect = _endpoint_text(edge.effect, concepts)
    return template.replace("{cause}", cause).replace("{effect}", effect)


def parse_yes_no(completion: str) -> str:
    """First-word yes/no parse; anything else is unparseable."""
    tokens = completion.strip().split()
    if not tokens:
        return UNPARSEABLE
    word = tokens[0].strip(_WORD_PUNCT).lower()
    if word == "yes":
        return YES
    if word == "no":
        return NO
    return UNPARSEABLE


@dataclass(frozen=True)
class Verdict:
    edge: CausalEdge
    votes_yes: int
    votes_no: int
    votes_unparseable: int
    decision: str
    confidence: float
    prompts_sent: int


def tally_votes(edge: CausalEdge, completions: list[str]) -> Verdict:
    """Majority vote; yes/no ties (possible only via unparseable completions)
    conservatively decide no."""
    votes = [parse_yes_no(c) for c in completions]
    yes = votes.count(YES)
    no = votes.count(NO)
    unparseable = votes.count(UNPARSEABLE)
    return Verdict(
        edge=edge,
        votes_yes=yes,
        votes_no=no,
        votes_unparseable=unparseable,
        decision=YES if yes > no else NO,
        confidence=yes / (yes + no) if (yes + no) > 0 else 0.0,
        prompts_sent=len(completions),
    )


@dataclass(frozen=True)
class SlicePrecision:
    precision: float | None  # None marks an undefined (empty-slice) value
    evaluated_count: int
    yes_count: int


@dataclass
class PrecisionReport:
    full: SlicePrecision
    classes_only: SlicePrecision
    instance_including: SlicePrecision
    verdicts: list[Verdict] = field(default_factory=list)
    unevaluated: list[CausalEdge] = field(default_factory=list)

    def by_slice(self, name: str) -> SlicePrecision:
        if name not in SLICES:
            raise EvalError(f"unknown slice {name!r}")
        return getattr(self, name)

    def to_dict(self) -> dict:
        return {
            name: vars(self.by_slice(name)) for name in SLICES
        }


def _edge_slices(edge: CausalEdge, concepts: ConceptInventory) -> list[str]:
    # phrase-endpoint edges cannot be assigned a class/instance slice and
    # count in the full slice only
    if not edge.is_fully_linked:
        return ["full"]
    return ["full", _slice_of((edge.cause.qid, edge.effect.qid), concepts)]


def eval_precision(
    kg: CausalKG,
    generator,
    concepts: ConceptInventory,
    votes: int = 5,
    template: str = DEFAULT_PROMPT_TEMPLATE,
    temperature: float = 0.7,
    max_new_tokens: int = 8,
    seed: int | None = None,
    retries: int = 2,
    in_flight: int = 1,
) -> PrecisionReport:
    """Probe the generator once per vote for every deduplicated edge.

    Backend failures after retries leave the edge unevaluated (reported,
    excluded from the counts). With a deterministic generator and a fixed
    seed the report is reproducible bit for bit.
    """
    if votes < 1 or votes % 2 == 0:
        raise EvalError(f"votes must be an odd count >= 1, got {votes}")
    edges = kg.edges
    prompts = [make_prompt(edge, template, concepts) for edge in edges]

    def probe(index: int) -> list[str] | None:
        edge_seed = seed + index if seed is not None else None
        last_exc = None
        for _ in range(retries + 1):
            try:
                completions = generator.generate(
                    prompts[index],
                    n=votes,
                    max_new_tokens=max_new_tokens,
                    temperature=temperature,
                    seed=edge_seed,
                )
                if len(completions) != votes:
                    raise EvalError(
                        f"generator returned {len(completions)} completions for n={votes}"
                    )
                return completions
            except Exception as exc:
                last_exc = exc
        del last_exc
        return None

    if in_flight > 1 and edges:
        with ThreadPoolExecutor(max_workers=in_flight) as pool:
            results = list(pool.map(probe, range(len(edges))))
    else:
        results = [probe(i) for i in range(len(edges))]

    verdicts: list[Verdict] = []
    unevaluated: list[CausalEdge] = []
    counts = {name: {"evaluated": 0, "yes": 0} for name in SLICES}
    for edge, completions in zip(edges, results):
        if completions is None:
            unevaluated.append(edge)
            continue
        verdict = tally_votes(edge, completions)
        verdicts.append(verdict)
        for name in _edge_slices(edge, concepts):
            counts[name]["evaluated"] += 1
            if verdict.decision == YES:
                counts[name]["yes"] += 1

    slices = {}
    for name in SLICES:
        evaluated = counts[name]["evaluated"]
        yes = counts[name]["yes"]
        slices[name] = SlicePrecision(
            precision=yes / evaluated if evaluated else None,
            evaluated_count=evaluated,
            yes_count=yes,
        )
    return PrecisionReport(verdicts=verdicts, unevaluated=unevaluated, **slices)
