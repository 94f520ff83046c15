"""Run configuration: flat key-value config files and the RunConfig model.

The config format is one ``key = value`` pair per line with ``#`` comments.
Values are parsed as JSON scalars when possible and kept as bare strings
otherwise, so ``provider = mock`` and ``rag.k = 2`` both work unquoted.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from clearbench.clear import WindowConfig
from clearbench.retrieval import Strategy, TokenBudget, validate_templates
from clearbench.sections import SectionWeightTable
from clearbench.prompts import DEFAULT_SYSTEM_TEMPLATE, DEFAULT_USER_TEMPLATE
from clearbench.baselines import (
    DEFAULT_CHUNK_SIZE_WORDS,
    DEFAULT_OVERLAP_WORDS,
    DEFAULT_TOP_K,
)


class ConfigError(ValueError):
    pass


def parse_flat_config(text: str) -> dict[str, object]:
    """Parse flat ``key = value`` lines into a dict of scalars."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        value = value.strip()
        try:
            values[key] = json.loads(value)
        except json.JSONDecodeError:
            values[key] = value
    return values


def load_flat_config(path: str | Path) -> dict[str, object]:
    return parse_flat_config(Path(path).read_text(encoding="utf-8"))


@dataclass
class RunConfig:
    corpus_path: str
    out_path: str = "results.jsonl"
    strategies: list[Strategy] = field(
        default_factory=lambda: [Strategy.WIDE, Strategy.RAG, Strategy.CLEAR]
    )
    provider: str = "mock"
    model_ids: list[str] = field(default_factory=lambda: ["mock-model"])
    system_template: str = DEFAULT_SYSTEM_TEMPLATE
    user_template: str = DEFAULT_USER_TEMPLATE
    seed: int = 42
    concurrency: int = 1
    rag_chunk_size_words: int = DEFAULT_CHUNK_SIZE_WORDS
    rag_overlap_words: int = DEFAULT_OVERLAP_WORDS
    rag_k: int = DEFAULT_TOP_K
    clear_radius_words: int = 150
    clear_alpha: float = 0.5
    clear_beta: float = 0.25
    clear_gamma: float = 0.15
    clear_delta: float = 0.10
    clear_budget_tokens: int = 8_500
    clear_merge_gap_words: int = 10
    section_weights: dict[str, float] = field(default_factory=dict)
    lexicon_path: str | None = None
    bonus_mode: str = "per_note"

    def validate(self) -> None:
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        if not self.model_ids:
            raise ConfigError("at least one model id is required")
        if self.provider not in ("mock", "remote"):
            raise ConfigError(f"unknown provider {self.provider!r}")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        try:
            validate_templates(self.system_template, self.user_template)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        self.window_config()  # bounds checks

    def window_config(self) -> WindowConfig:
        return WindowConfig(
            radius_words=self.clear_radius_words,
            align_weight=self.clear_alpha,
            section_weight=self.clear_beta,
            confidence_weight=self.clear_gamma,
            relationship_bonus=self.clear_delta,
            merge_gap_words=self.clear_merge_gap_words,
        )

    def token_budget(self) -> TokenBudget:
        return TokenBudget(max_context_tokens=self.clear_budget_tokens)

    def weight_table(self) -> SectionWeightTable:
        table = SectionWeightTable.default()
        if self.section_weights:
            table = table.with_overrides(self.section_weights)
        return table

    def config_hash(self) -> str:
        """Stable digest of all knobs, independent of key ordering."""
        payload = {
            "corpus_path": self.corpus_path,
            "strategies": sorted(s.value for s in self.strategies),
            "provider": self.provider,
            "model_ids": sorted(self.model_ids),
            "system_template": self.system_template,
            "user_template": self.user_template,
            "seed": self.seed,
            "rag": {
                "chunk_size_words": self.rag_chunk_size_words,
                "overlap_words": self.rag_overlap_words,
                "k": self.rag_k,
            },
            "clear": {
                "radius_words": self.clear_radius_words,
                "alpha": self.clear_alpha,
                "beta": self.clear_beta,
                "gamma": self.clear_gamma,
                "delta": self.clear_delta,
                "budget_tokens": self.clear_budget_tokens,
                "merge_gap_words": self.clear_merge_gap_words,
            },
            "section_weights": dict(sorted(self.section_weights.items())),
            "lexicon_path": self.lexicon_path,
            "bonus_mode": self.bonus_mode,
        }
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    @classmethod
    def from_flat(cls, values: dict[str, object]) -> "RunConfig":
        def as_list(value) -> list[str]:
            if isinstance(value, list):
                return [str(v) for v in value]
            return [part.strip() for part in str(value).split(",") if part.strip()]

        if "corpus" not in values:
            raise ConfigError("config is missing required key: corpus")
        section_weights = {
            key[len("section_weight.") :]: float(v)  # noqa: E203
            for key, v in values.items()
            if key.startswith("section_weight.")
        }
        config = cls(
            corpus_path=str(values["corpus"]),
            out_path=str(values.get("out", "results.jsonl")),
            provider=str(values.get("provider", "mock")),
            model_ids=as_list(values.get("models", "mock-model")),
            seed=int(values.get("seed", 42)),
            concurrency=int(values.get("concurrency", 1)),
            system_template=str(values.get("templates.system", DEFAULT_SYSTEM_TEMPLATE)),
            user_template=str(values.get("templates.user", DEFAULT_USER_TEMPLATE)),
            rag_chunk_size_words=int(values.get("rag.chunk_size_words", DEFAULT_CHUNK_SIZE_WORDS)),
            rag_overlap_words=int(values.get("rag.overlap_words", DEFAULT_OVERLAP_WORDS)),
            rag_k=int(values.get("rag.k", DEFAULT_TOP_K)),
            clear_radius_words=int(values.get("clear.radius_words", 150)),
            clear_alpha=float(values.get("clear.alpha", 0.5)),
            clear_beta=float(values.get("clear.beta", 0.25)),
            clear_gamma=float(values.get("clear.gamma", 0.15)),
            clear_delta=float(values.get("clear.delta", 0.10)),
            clear_budget_tokens=int(values.get("clear.budget_tokens", 8_500)),
            clear_merge_gap_words=int(values.get("clear.merge_gap_words", 10)),
            section_weights=section_weights,
            lexicon_path=(str(values["lexicon"]) if "lexicon" in values else None),
            bonus_mode=str(values.get("sweep.bonus_mode", "per_note")),
        )
        if "strategies" in values:
            try:
                config.strategies = [Strategy(s) for s in as_list(values["strategies"])]
            except ValueError as exc:
                raise ConfigError(f"unknown strategy in config: {exc}") from exc
        config.validate()
        return config

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        return cls.from_flat(load_flat_config(path))
