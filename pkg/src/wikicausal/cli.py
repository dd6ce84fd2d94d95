"""Command-line pipeline driver.

Each command runs one pipeline stage, writes its artifacts under the output
directory, and prints a one-line machine-parseable summary. Exit codes:
0 success, 1 validation failure, 2 operational error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

from . import corpus as corpus_mod
from . import corpus_builder, extractor, inference, kg as kg_mod, linker, report
from .config import ConfigError, RunConfig, apply_overrides, load_config
from .corpus import CorpusFormatError
from .corpus_builder import CorpusBuildError
from .evaluator import EvalError, eval_precision, eval_recall
from .extractor import ExtractionError
from .inference import InferenceError
from .kg import KgError
from .report import LeaderboardError, LeaderboardRow

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_OPERATIONAL = 2

_OPERATIONAL_ERRORS = (
    CorpusFormatError,
    CorpusBuildError,
    KgError,
    ExtractionError,
    InferenceError,
    EvalError,
    LeaderboardError,
    OSError,
)


def _summary(command: str, **values) -> None:
    parts = [f"command={command}"] + [f"{k}={v}" for k, v in values.items()]
    print(" ".join(parts))


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _require_path(path: str | None, name: str) -> str:
    if not path:
        raise FileNotFoundError(f"missing input: {name} not configured")
    if not os.path.exists(path):
        raise FileNotFoundError(f"missing input: {name} {path}")
    return path


def _out_dir(cfg: RunConfig) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return cfg.out_dir


def _write_text(path: str, text: str) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _write_json(path: str, obj) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _now(cfg: RunConfig) -> str:
    if cfg.timestamp:
        return cfg.timestamp
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _generator(cfg: RunConfig):
    if cfg.mock:
        rules = []
        if cfg.mock_fixture:
            rules, _ = inference.load_mock_fixture(
                _require_path(cfg.mock_fixture, "mock fixture")
            )
        return inference.MockGenerator(rules)
    endpoint = cfg.effective_endpoint()
    if not endpoint:
        raise ConfigError("endpoint: no inference endpoint configured (or use --mock)")
    return inference.HttpGenerator(endpoint, timeout=cfg.timeout)


def _qa_backend(cfg: RunConfig):
    if cfg.mock:
        rules = []
        if cfg.mock_fixture:
            _, rules = inference.load_mock_fixture(
                _require_path(cfg.mock_fixture, "mock fixture")
            )
        return inference.MockQaBackend(rules)
    endpoint = cfg.effective_endpoint()
    if not endpoint:
        raise ConfigError("endpoint: no inference endpoint configured (or use --mock)")
    return inference.HttpQaBackend(endpoint, timeout=cfg.timeout)


def cmd_corpus_validate(cfg: RunConfig, args) -> int:
    path = _require_path(args.in_path or cfg.corpus_path, "corpus")
    reader = corpus_mod.read_corpus(path, on_error="skip", validate=True)
    for _ in reader:
        pass
    out = _out_dir(cfg)
    problems = [message for _, message in reader.skipped]
    _write_text(
        os.path.join(out, "violations.txt"),
        "\n".join(problems) + ("\n" if problems else ""),
    )
    for message in problems:
        print(message)
    _summary(
        "corpus-validate",
        status="fail" if problems else "ok",
        valid=reader.yielded,
        problems=len(problems),
    )
    return EXIT_VALIDATION if problems else EXIT_OK


def cmd_corpus_stats(cfg: RunConfig, args) -> int:
    path = _require_path(args.in_path or cfg.corpus_path, "corpus")
    stats = corpus_mod.corpus_stats(corpus_mod.read_corpus(path))
    out = _out_dir(cfg)
    _write_json(os.path.join(out, "corpus-stats.json"), vars(stats))
    _summary(
        "corpus-stats",
        status="ok",
        article_count=stats.article_count,
        text_page_count=stats.text_page_count,
        redirect_count=stats.redirect_count,
        unique_document_concepts=stats.unique_document_concepts,
        avg_text_len=f"{stats.avg_text_len:.1f}",
        avg_first_section_len=f"{stats.avg_first_section_len:.1f}",
        avg_event_concepts_per_article=f"{stats.avg_event_concepts_per_article:.2f}",
    )
    return EXIT_OK


def cmd_build_corpus(cfg: RunConfig, args) -> int:
    pages_path = _require_path(args.in_path or cfg.pages_path, "pages")
    exports_path = _require_path(cfg.inventory_path, "inventory")
    exports = corpus_builder.read_concept_exports(exports_path)
    curation = None
    if cfg.curation_path:
        curation = corpus_builder.CurationList.from_file(
            _require_path(cfg.curation_path, "curation list")
        )
    class_candidates = [e for e in exports if e.kind == "class"]
    seed_classes = corpus_builder.select_event_classes(
        class_candidates, occurrence_root=cfg.occurrence_root, curation=curation
    )
    seed_qids = {c.qid for c in seed_classes}
    class_map = corpus_builder.build_class_map(exports, seed_qids)
    index = corpus_builder.build_concept_index(exports)
    builder = corpus_builder.build_documents(
        corpus_builder.read_raw_pages(pages_path), index, class_map
    )
    out = _out_dir(cfg)
    corpus_path = os.path.join(out, "corpus.jsonl")
    written = corpus_mod.write_corpus(corpus_path, builder)
    _summary(
        "build-corpus",
        status="ok",
        built=written,
        dropped=builder.dropped_count,
        event_classes=len(seed_qids),
        out=corpus_path,
    )
    return EXIT_OK


def cmd_build_basekg(cfg: RunConfig, args) -> int:
    relations_path = _require_path(args.in_path or cfg.relations_path, "relations")
    inventory = kg_mod.load_inventory(_require_path(cfg.inventory_path, "inventory"))
    relations = kg_mod.read_relations_tsv(relations_path)
    base = kg_mod.build_base_kg(inventory, relations, version=cfg.kg_version)
    out = _out_dir(cfg)
    path = os.path.join(out, "base-kg.json")
    kg_mod.write_kg(path, base)
    _summary("build-basekg", status="ok", edges=len(base), out=path)
    return EXIT_OK


def _extract_document_pairs(cfg: RunConfig, doc, qa) -> list[extractor.CandidatePair]:
    if cfg.method == "pattern":
        return extractor.extract_patterns(
            doc, scope=cfg.scope, templates=cfg.pattern_templates
        )
    seed = kg_mod.ConceptRef(
        qid=doc.document_concept.qid,
        kind=kg_mod.INSTANCE,
        labels=doc.document_concept.labels,
    )
    return extractor.extract_qal(
        doc, seed, scope=cfg.scope, qa=qa, min_score=cfg.min_score, retries=cfg.retries
    )


def cmd_extract(cfg: RunConfig, args) -> int:
    corpus_path = _require_path(args.in_path or cfg.corpus_path, "corpus")
    qa = _qa_backend(cfg) if cfg.method == "qal" else None
    pairs: list[extractor.CandidatePair] = []
    documents = 0
    skipped_redirects = 0
    for doc in corpus_mod.read_corpus(corpus_path):
        if doc.is_redirect:
            skipped_redirects += 1
            continue
        if not doc.document_concept.labels:
            continue
        documents += 1
        pairs.extend(_extract_document_pairs(cfg, doc, qa))
    name = cfg.effective_kg_name()
    out = _out_dir(cfg)
    pairs_path = os.path.join(out, f"{name}.pairs.jsonl")
    extractor.write_pairs(pairs_path, pairs)
    empty_index = linker.LabelIndex({})
    raw_kg = kg_mod.CausalKG(
        name=f"{name}-raw",
        edges=[linker.link_pair(p, empty_index).edge for p in pairs],
        version=cfg.kg_version,
    )
    raw_path = os.path.join(out, f"{name}-raw.kg.json")
    kg_mod.write_kg(raw_path, raw_kg)
    _summary(
        "extract",
        status="ok",
        method=cfg.method,
        scope=cfg.scope,
        documents=documents,
        skipped_redirects=skipped_redirects,
        pairs=len(pairs),
        out=pairs_path,
    )
    return EXIT_OK


def cmd_link(cfg: RunConfig, args) -> int:
    pairs_path = _require_path(args.in_path, "pairs")
    inventory = kg_mod.load_inventory(_require_path(cfg.inventory_path, "inventory"))
    index = linker.build_index(inventory)
    pairs = extractor.read_pairs(pairs_path)
    results = [linker.link_pair(pair, index) for pair in pairs]
    name = cfg.effective_kg_name()
    linked_kg = kg_mod.CausalKG(
        name=name, edges=[r.edge for r in results], version=cfg.kg_version
    )
    unlinked = [entry for r in results for entry in r.unlinked]
    out = _out_dir(cfg)
    kg_path = os.path.join(out, f"{name}.kg.json")
    kg_mod.write_kg(kg_path, linked_kg)
    unlinked_path = os.path.join(out, f"{name}.unlinked.tsv")
    _write_text(unlinked_path, linker.render_unlinked_report(unlinked))
    _summary(
        "link",
        status="ok",
        pairs=len(pairs),
        edges=len(linked_kg),
        fully_linked=sum(1 for e in linked_kg.edges if e.is_fully_linked),
        unlinked_phrases=len(unlinked),
        out=kg_path,
    )
    return EXIT_OK


def cmd_eval_recall(cfg: RunConfig, args) -> int:
    kg_path = _require_path(args.in_path, "kg")
    base_path = _require_path(args.base or cfg.base_kg_path, "base kg")
    inventory = kg_mod.load_inventory(_require_path(cfg.inventory_path, "inventory"))
    output = kg_mod.read_kg(kg_path)
    base = kg_mod.read_kg(base_path)
    recall_report = eval_recall(output, base, inventory)
    out = _out_dir(cfg)
    csv_path = os.path.join(out, f"recall-{output.name}.csv")
    _write_text(csv_path, report.render_recall_csv([(output.name, recall_report)]))
    _write_json(
        os.path.join(out, f"recall-{output.name}.json"),
        {"kg": output.name, "version": output.version, "slices": recall_report.to_dict()},
    )
    full = recall_report.full
    _summary(
        "eval-recall",
        status="ok",
        kg=output.name,
        recall=_fmt(full.recall),
        hit_count=full.hit_count,
        rel_count=full.rel_count,
        base_kg_size=full.base_kg_size,
        base_count=full.base_count,
        base_coverage=_fmt(full.base_coverage),
        out=csv_path,
    )
    return EXIT_OK


def cmd_eval_precision(cfg: RunConfig, args) -> int:
    kg_path = _require_path(args.in_path, "kg")
    inventory = kg_mod.load_inventory(_require_path(cfg.inventory_path, "inventory"))
    target = kg_mod.read_kg(kg_path)
    generator = _generator(cfg)
    precision_report = eval_precision(
        target,
        generator,
        inventory,
        votes=cfg.votes,
        template=cfg.prompt_template,
        temperature=cfg.temperature,
        max_new_tokens=cfg.max_new_tokens,
        seed=cfg.seed,
        retries=cfg.retries,
        in_flight=cfg.in_flight,
    )
    out = _out_dir(cfg)
    md_path = os.path.join(out, f"precision-{target.name}.md")
    _write_text(md_path, report.render_precision_md([(target.name, precision_report)]))
    _write_text(
        os.path.join(out, f"verdicts-{target.name}.jsonl"),
        report.verdicts_to_jsonl(precision_report.verdicts),
    )
    _write_json(
        os.path.join(out, f"precision-{target.name}.json"),
        {
            "kg": target.name,
            "version": target.version,
            "slices": precision_report.to_dict(),
            "unevaluated": len(precision_report.unevaluated),
        },
    )
    full = precision_report.full
    _summary(
        "eval-precision",
        status="ok",
        kg=target.name,
        precision=_fmt(full.precision),
        evaluated=full.evaluated_count,
        yes=full.yes_count,
        votes=cfg.votes,
        out=md_path,
    )
    return EXIT_OK


def cmd_report(cfg: RunConfig, args) -> int:
    results_dir = args.in_path or cfg.out_dir
    if not os.path.isdir(results_dir):
        raise FileNotFoundError(f"missing input: results directory {results_dir}")
    recall_reports: dict[str, dict] = {}
    precision_reports: dict[str, dict] = {}
    for entry in sorted(os.listdir(results_dir)):
        path = os.path.join(results_dir, entry)
        if entry.startswith("recall-") and entry.endswith(".json"):
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
            recall_reports[obj["kg"]] = obj
        elif entry.startswith("precision-") and entry.endswith(".json"):
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
            precision_reports[obj["kg"]] = obj
    out = _out_dir(cfg)
    digest = cfg.eval_digest()
    now = _now(cfg)
    leaderboard_path = os.path.join(out, "leaderboard.csv")
    rows = 0
    for name, recall_obj in sorted(recall_reports.items()):
        slices = recall_obj["slices"]
        precision_obj = precision_reports.get(name)

        def _precision(slice_name: str) -> float | None:
            if precision_obj is None:
                return None
            return precision_obj["slices"][slice_name]["precision"]

        row = LeaderboardRow(
            kg_name=name,
            kg_version=recall_obj.get("version", "v0"),
            recall_full=slices["full"]["recall"],
            recall_classes_only=slices["classes_only"]["recall"],
            recall_instance_including=slices["instance_including"]["recall"],
            precision_full=_precision("full"),
            precision_classes_only=_precision("classes_only"),
            precision_instance_including=_precision("instance_including"),
            evaluated_at=now,
            updated_at=now,
            config_digest=digest,
        )
        report.update_leaderboard(leaderboard_path, row)
        rows += 1
    _summary(
        "report",
        status="ok",
        kgs=rows,
        leaderboard=leaderboard_path,
        config_digest=digest,
    )
    return EXIT_OK


COMMANDS = {
    "corpus-validate": cmd_corpus_validate,
    "corpus-stats": cmd_corpus_stats,
    "build-corpus": cmd_build_corpus,
    "build-basekg": cmd_build_basekg,
    "extract": cmd_extract,
    "link": cmd_link,
    "eval-recall": cmd_eval_recall,
    "eval-precision": cmd_eval_precision,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wikicausal",
        description="Construct and evaluate causal knowledge graphs over the corpus.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="YAML run configuration file")
    parser.add_argument("--in", dest="in_path", help="primary input path")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--method", choices=["pattern", "qal"])
    parser.add_argument("--scope", choices=["first_section", "full_text"])
    parser.add_argument("--endpoint", help="inference endpoint URL")
    parser.add_argument("--votes", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument(
        "--mock", action="store_true", help="use the built-in deterministic mock backend"
    )
    parser.add_argument("--base", help="base KG path (eval-recall)")
    parser.add_argument("--inventory", help="concept inventory path")
    parser.add_argument("--fixture", help="mock fixture JSONL path")
    parser.add_argument("--kg-name", dest="kg_name")
    parser.add_argument("--kg-version", dest="kg_version")
    parser.add_argument("--timestamp", help="fixed leaderboard timestamp")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        apply_overrides(
            cfg,
            {
                "out_dir": args.out,
                "method": args.method,
                "scope": args.scope,
                "endpoint": args.endpoint,
                "votes": args.votes,
                "seed": args.seed,
                "mock": True if args.mock else None,
                "inventory_path": args.inventory,
                "mock_fixture": args.fixture,
                "kg_name": args.kg_name,
                "kg_version": args.kg_version,
                "timestamp": args.timestamp,
            },
        )
        issues = cfg.problems()
        if issues:
            for issue in issues:
                print(f"config error: {issue}", file=sys.stderr)
            return EXIT_VALIDATION
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL
    except _OPERATIONAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL


if __name__ == "__main__":
    sys.exit(main())
