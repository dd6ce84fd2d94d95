"""Declarative run configuration: YAML file, flag overrides, validation."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, fields
from typing import Any

import yaml

from .evaluator import DEFAULT_PROMPT_TEMPLATE
from .report import config_digest

ENDPOINT_ENV_VAR = "WIKICAUSAL_ENDPOINT"

_QID_RE = re.compile(r"^Q[0-9]+$")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass
class RunConfig:
    corpus_path: str | None = None
    inventory_path: str | None = None
    relations_path: str | None = None
    pages_path: str | None = None
    base_kg_path: str | None = None
    curation_path: str | None = None
    occurrence_root: str = "Q1190554"
    method: str = "pattern"
    scope: str = "first_section"
    min_score: float = 0.5
    endpoint: str | None = None
    timeout: float = 30.0
    retries: int = 2
    in_flight: int = 1
    votes: int = 5
    temperature: float = 0.7
    max_new_tokens: int = 8
    seed: int = 0
    out_dir: str = "results"
    kg_name: str | None = None
    kg_version: str = "v0"
    mock: bool = False
    mock_fixture: str | None = None
    pattern_templates: list[str] | None = None
    prompt_template: str = DEFAULT_PROMPT_TEMPLATE
    timestamp: str | None = None  # fixed leaderboard timestamp for reproducible runs

    def effective_kg_name(self) -> str:
        return self.kg_name or f"{self.method}-kg"

    def effective_endpoint(self) -> str | None:
        return self.endpoint or os.environ.get(ENDPOINT_ENV_VAR)

    def eval_digest(self) -> str:
        """Digest of the fields that determine evaluation outcomes."""
        return config_digest(
            {
                "method": self.method,
                "scope": self.scope,
                "min_score": self.min_score,
                "votes": self.votes,
                "temperature": self.temperature,
                "max_new_tokens": self.max_new_tokens,
                "seed": self.seed,
                "prompt_template": self.prompt_template,
                "pattern_templates": self.pattern_templates,
                "backend": "mock" if self.mock else (self.effective_endpoint() or ""),
            }
        )

    def problems(self) -> list[str]:
        issues = []
        if self.method not in ("pattern", "qal"):
            issues.append(f"method: {self.method!r} not one of pattern, qal")
        if self.scope not in ("first_section", "full_text"):
            issues.append(f"scope: {self.scope!r} not one of first_section, full_text")
        if not 0.0 <= self.min_score <= 1.0:
            issues.append(f"min_score: {self.min_score} outside [0,1]")
        if self.votes < 1 or self.votes % 2 == 0:
            issues.append(f"votes: {self.votes} must be an odd count >= 1")
        if self.temperature < 0:
            issues.append(f"temperature: {self.temperature} must be >= 0")
        if self.timeout <= 0:
            issues.append(f"timeout: {self.timeout} must be > 0")
        if self.retries < 0:
            issues.append(f"retries: {self.retries} must be >= 0")
        if self.in_flight < 1:
            issues.append(f"in_flight: {self.in_flight} must be >= 1")
        if self.max_new_tokens < 1:
            issues.append(f"max_new_tokens: {self.max_new_tokens} must be >= 1")
        if not _QID_RE.match(self.occurrence_root):
            issues.append(f"occurrence_root: {self.occurrence_root!r} is not a qid")
        for placeholder in ("{cause}", "{effect}"):
            if placeholder not in self.prompt_template:
                issues.append(f"prompt_template: missing {placeholder} placeholder")
        return issues


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def load_config(path: str | None = None) -> RunConfig:
    """Read the YAML config file; unknown keys are rejected by name."""
    if path is None:
        return RunConfig()
    with open(path, "r", encoding="utf-8") as fh:
        raw: Any = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    unknown = sorted(set(raw) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(f"{path}: unknown config field {unknown[0]!r}")
    return RunConfig(**raw)


def apply_overrides(config: RunConfig, overrides: dict[str, Any]) -> RunConfig:
    """Flags win over config-file values; None means not supplied."""
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown config field {key!r}")
        setattr(config, key, value)
    return config
