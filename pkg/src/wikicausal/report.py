"""Result table rendering and the leaderboard store.

All renderers are pure text producers with fixed 4-decimal number formatting
so artifacts are diffable; the leaderboard file is rewritten atomically.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable

from .evaluator import SLICES, PrecisionReport, RecallReport, Verdict

RECALL_CSV_HEADER = (
    "kg",
    "slice",
    "recall",
    "hit_count",
    "rel_count",
    "base_kg_size",
    "base_count",
    "base_coverage",
)

LEADERBOARD_COLUMNS = (
    "kg_name",
    "kg_version",
    "recall_full",
    "recall_classes_only",
    "recall_instance_including",
    "precision_full",
    "precision_classes_only",
    "precision_instance_including",
    "evaluated_at",
    "updated_at",
    "config_digest",
)

UNDEFINED = "n/a"


class LeaderboardError(RuntimeError):
    """The leaderboard store is corrupt or cannot be updated."""


def _fmt(value: float | None) -> str:
    return UNDEFINED if value is None else f"{value:.4f}"


def render_recall_csv(reports: Iterable[tuple[str, RecallReport]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RECALL_CSV_HEADER)
    for kg_name, report in sorted(reports, key=lambda item: item[0]):
        for slice_name in SLICES:
            score = report.by_slice(slice_name)
            writer.writerow(
                [
                    kg_name,
                    slice_name,
                    _fmt(score.recall),
                    score.hit_count,
                    score.rel_count,
                    score.base_kg_size,
                    score.base_count,
                    _fmt(score.base_coverage),
                ]
            )
    return buffer.getvalue()


def render_precision_md(reports: Iterable[tuple[str, PrecisionReport]]) -> str:
    lines = [
        "| kg | slice | precision | evaluated | yes |",
        "| --- | --- | --- | --- | --- |",
    ]
    for kg_name, report in sorted(reports, key=lambda item: item[0]):
        for slice_name in SLICES:
            score = report.by_slice(slice_name)
            lines.append(
                f"| {kg_name} | {slice_name} | {_fmt(score.precision)} "
                f"| {score.evaluated_count} | {score.yes_count} |"
            )
    return "\n".join(lines) + "\n"


def verdicts_to_jsonl(verdicts: Iterable[Verdict]) -> str:
    """Audit detail: one JSON object per evaluated edge."""
    lines = []
    for verdict in verdicts:
        cause = verdict.edge.cause
        effect = verdict.edge.effect
        lines.append(
            json.dumps(
                {
                    "cause": cause.qid if cause.is_linked else cause.phrase,
                    "effect": effect.qid if effect.is_linked else effect.phrase,
                    "votes_yes": verdict.votes_yes,
                    "votes_no": verdict.votes_no,
                    "votes_unparseable": verdict.votes_unparseable,
                    "decision": verdict.decision,
                    "confidence": round(verdict.confidence, 4),
                    "prompts_sent": verdict.prompts_sent,
                },
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def config_digest(config: dict) -> str:
    """Deterministic short digest of an evaluation configuration."""
    canonical = json.dumps(config, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class LeaderboardRow:
    kg_name: str
    kg_version: str
    recall_full: float
    recall_classes_only: float
    recall_instance_including: float
    precision_full: float | None
    precision_classes_only: float | None
    precision_instance_including: float | None
    evaluated_at: str
    updated_at: str
    config_digest: str

    def key(self) -> tuple[str, str, str]:
        return (self.kg_name, self.kg_version, self.config_digest)


def _row_to_record(row: LeaderboardRow) -> dict[str, str]:
    return {
        "kg_name": row.kg_name,
        "kg_version": row.kg_version,
        "recall_full": _fmt(row.recall_full),
        "recall_classes_only": _fmt(row.recall_classes_only),
        "recall_instance_including": _fmt(row.recall_instance_including),
        "precision_full": _fmt(row.precision_full),
        "precision_classes_only": _fmt(row.precision_classes_only),
        "precision_instance_including": _fmt(row.precision_instance_including),
        "evaluated_at": row.evaluated_at,
        "updated_at": row.updated_at,
        "config_digest": row.config_digest,
    }


def _parse_optional(value: str, where: str) -> float | None:
    if value == UNDEFINED:
        return None
    try:
        return float(value)
    except ValueError:
        raise LeaderboardError(f"{where}: bad numeric cell {value!r}") from None


def _read_rows(path) -> list[LeaderboardRow]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != LEADERBOARD_COLUMNS:
            raise LeaderboardError(f"{path}: unexpected leaderboard header")
        rows = []
        for line_no, record in enumerate(reader, 2):
            if any(record.get(c) is None for c in LEADERBOARD_COLUMNS):
                raise LeaderboardError(f"{path}: short row at line {line_no}")
            where = f"{path}:{line_no}"
            try:
                recall_full = float(record["recall_full"])
                recall_classes = float(record["recall_classes_only"])
                recall_instances = float(record["recall_instance_including"])
            except ValueError:
                raise LeaderboardError(f"{where}: bad recall cell") from None
            rows.append(
                LeaderboardRow(
                    kg_name=record["kg_name"],
                    kg_version=record["kg_version"],
                    recall_full=recall_full,
                    recall_classes_only=recall_classes,
                    recall_instance_including=recall_instances,
                    precision_full=_parse_optional(record["precision_full"], where),
                    precision_classes_only=_parse_optional(
                        record["precision_classes_only"], where
                    ),
                    precision_instance_including=_parse_optional(
                        record["precision_instance_including"], where
                    ),
                    evaluated_at=record["evaluated_at"],
                    updated_at=record["updated_at"],
                    config_digest=record["config_digest"],
                )
            )
        return rows


def update_leaderboard(path, row: LeaderboardRow) -> list[LeaderboardRow]:
    """Insert or replace the row keyed on (kg name, version, config digest),
    keep the file sorted by full-slice recall descending, write atomically."""
    rows = _read_rows(path) if os.path.exists(path) else []
    rows = [r for r in rows if r.key() != row.key()]
    rows.append(row)
    rows.sort(key=lambda r: (-r.recall_full, r.kg_name, r.kg_version, r.config_digest))

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=list(LEADERBOARD_COLUMNS), lineterminator="\n"
            )
            writer.writeheader()
            for entry in rows:
                writer.writerow(_row_to_record(entry))
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    return rows
