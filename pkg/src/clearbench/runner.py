"""Benchmark orchestration: strategy/model matrices, results logs, replay.

Every (note, question, strategy, model) cell runs with the same prompt
templates; per-cell provider failures are recorded in the log without
aborting the rest of the matrix. Records persist as append-friendly JSON
lines sorted canonically by (note, question, strategy, model).
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from clearbench.baselines import build_wide_context, retrieve_rag
from clearbench.clear import retrieve_clear
from clearbench.corpus import ClinicalNote, Corpus, Question, load_corpus
from clearbench.entities import Lexicon, default_lexicon
from clearbench.metrics import EvalResult, cosine, meteor
from clearbench.providers import (
    AnswerRequest,
    HashingEmbedder,
    MockAnswerProvider,
    ProviderError,
    RemoteChatProvider,
)
from clearbench.retrieval import ContextPackage, Strategy
from clearbench.runconfig import RunConfig

RECORD_SCHEMA_VERSION = 1


class FixtureError(ValueError):
    pass


@dataclass
class RunRecord:
    note_id: str
    question_id: str
    strategy: Strategy
    model_id: str
    provider: str
    status: str  # "ok" or a provider error class
    answer: str
    semantic_similarity: float | None
    meteor: float | None
    prompt_tokens: int
    completion_tokens: int
    total_tokens: int
    context_tokens: int
    latency_ms: int
    config_hash: str
    prompt_hash: str
    started_at: str
    finished_at: str
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_eval_result(self) -> EvalResult:
        if not self.ok:
            raise ValueError(f"record has status {self.status!r}, not ok")
        result = EvalResult(
            note_id=self.note_id,
            question_id=self.question_id,
            strategy=self.strategy,
            model_id=self.model_id,
            answer=self.answer,
            semantic_similarity=self.semantic_similarity,
            meteor=self.meteor,
            total_tokens=self.total_tokens,
            context_tokens=self.context_tokens,
        )
        result.validate()
        return result

    def to_dict(self) -> dict:
        data = dict(self.__dict__)
        data["strategy"] = self.strategy.value
        data["schema_version"] = RECORD_SCHEMA_VERSION
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        data = dict(data)
        data.pop("schema_version", None)
        data["strategy"] = Strategy(data["strategy"])
        return cls(**data)


def prompt_hash(system_template: str, user_template: str, question: Question) -> str:
    """Digest of the prompt with only the question substituted.

    The context placeholder stays literal, so all strategies in a cell share
    one hash while different questions get different ones.
    """
    rendered = (
        system_template.replace("{question}", question.text)
        + "\x00"
        + user_template.replace("{question}", question.text)
    )
    return hashlib.sha256(rendered.encode()).hexdigest()[:16]


class Engine:
    """Retrieval engine with all strategy knobs bound.

    Shared by the batch runner and the HTTP service so ad-hoc experiments
    and matrix runs go through identical code paths.
    """

    def __init__(self, config: RunConfig, lexicon: Lexicon | None = None):
        self.config = config
        self.embedder = HashingEmbedder()
        if lexicon is not None:
            self.lexicon = lexicon
        elif config.lexicon_path:
            self.lexicon = Lexicon.from_file(config.lexicon_path)
        else:
            self.lexicon = default_lexicon()
        self.weight_table = config.weight_table()
        self.window_config = config.window_config()
        self.budget = config.token_budget()
        self.config_hash = config.config_hash()

    def build_context(
        self, note: ClinicalNote, question: Question, strategy: Strategy
    ) -> ContextPackage:
        if strategy == Strategy.WIDE:
            return build_wide_context(note)
        if strategy == Strategy.RAG:
            return retrieve_rag(
                note,
                question,
                self.embedder,
                k=self.config.rag_k,
                chunk_size_words=self.config.rag_chunk_size_words,
                overlap_words=self.config.rag_overlap_words,
            )
        if strategy == Strategy.CLEAR:
            return retrieve_clear(
                note,
                question,
                lexicon=self.lexicon,
                weight_table=self.weight_table,
                config=self.window_config,
                budget=self.budget,
                embedder=self.embedder,
            )
        raise ValueError(f"unknown strategy {strategy!r}")

    def score_answer(self, answer: str, question: Question) -> tuple[float, float]:
        similarity = cosine(
            self.embedder.embed(answer), self.embedder.embed(question.gold_answer)
        )
        return similarity, meteor(answer, question.gold_answer)


def make_provider(config: RunConfig):
    if config.provider == "mock":
        return MockAnswerProvider()
    return RemoteChatProvider()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def run_cell(
    engine: Engine,
    provider,
    note: ClinicalNote,
    question: Question,
    strategy: Strategy,
    model_id: str,
) -> RunRecord:
    config = engine.config
    started = _now()
    base = dict(
        note_id=note.id,
        question_id=question.id,
        strategy=strategy,
        model_id=model_id,
        provider=getattr(provider, "kind", "unknown"),
        config_hash=engine.config_hash,
        prompt_hash=prompt_hash(config.system_template, config.user_template, question),
        started_at=started,
    )
    try:
        context = engine.build_context(note, question, strategy)
        request = AnswerRequest(
            model_id=model_id,
            system_template=config.system_template,
            user_template=config.user_template,
            context=context,
            question=question,
        )
        response = provider.generate_answer(request)
        similarity, meteor_score = engine.score_answer(response.text, question)
        return RunRecord(
            **base,
            status="ok",
            answer=response.text,
            semantic_similarity=similarity,
            meteor=meteor_score,
            prompt_tokens=response.prompt_tokens,
            completion_tokens=response.completion_tokens,
            total_tokens=response.total_tokens,
            context_tokens=context.context_tokens,
            latency_ms=response.latency_ms,
            finished_at=_now(),
        )
    except ProviderError as exc:
        return RunRecord(
            **base,
            status=exc.error_class,
            answer="",
            semantic_similarity=None,
            meteor=None,
            prompt_tokens=0,
            completion_tokens=0,
            total_tokens=0,
            context_tokens=0,
            latency_ms=0,
            finished_at=_now(),
            error=str(exc),
        )


def run_matrix(
    config: RunConfig,
    corpus: Corpus | None = None,
    provider=None,
    engine: Engine | None = None,
) -> list[RunRecord]:
    """Execute the full note x question x strategy x model matrix.

    Provider failures are captured per cell; corpus or configuration
    problems raise before any cell runs. The returned list is in canonical
    order regardless of execution order.
    """
    config.validate()
    if corpus is None:
        corpus = load_corpus(config.corpus_path)
    engine = engine or Engine(config)
    provider = provider if provider is not None else make_provider(config)

    cells = [
        (note, question, strategy, model_id)
        for note in corpus.notes
        for question in corpus.questions
        for strategy in config.strategies
        for model_id in config.model_ids
    ]
    if config.concurrency > 1:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            records = list(
                pool.map(lambda cell: run_cell(engine, provider, *cell), cells)
            )
    else:
        records = [run_cell(engine, provider, *cell) for cell in cells]
    records.sort(
        key=lambda r: (r.note_id, r.question_id, r.strategy.value, r.model_id)
    )
    return records


def exit_code_for(records: list[RunRecord]) -> int:
    """0 all ok, 3 partial provider failures, 4 total failure."""
    if not records:
        return 4
    failures = sum(1 for r in records if not r.ok)
    if failures == 0:
        return 0
    if failures == len(records):
        return 4
    return 3


def save_records(records: list[RunRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


def load_records(path: str | Path) -> list[RunRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(RunRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad record: {exc}") from exc
    return records


def eval_results(records: list[RunRecord]) -> list[EvalResult]:
    return [r.to_eval_result() for r in records if r.ok]


@dataclass
class FixtureData:
    results: list[EvalResult]
    note_sizes: dict[str, int]
    remarks: list[str]
    metadata: dict


def default_fixture_path() -> Path:
    return Path(str(resources.files("clearbench").joinpath("data/table2.json")))


def load_fixture(path: str | Path) -> FixtureData:
    """Load externally published similarity/token values as EvalResults."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FixtureError(f"fixture is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("schema_version") != 1:
        raise FixtureError("fixture must be an object with schema_version 1")
    raw_results = payload.get("results")
    if not isinstance(raw_results, list) or not raw_results:
        raise FixtureError("fixture field 'results' must be a non-empty list")

    results: list[EvalResult] = []
    for i, raw in enumerate(raw_results):
        loc = f"results[{i}]"
        if not isinstance(raw, dict):
            raise FixtureError(f"{loc}: must be an object")
        try:
            result = EvalResult(
                note_id=str(raw["note_id"]),
                question_id=str(raw["question_id"]),
                strategy=Strategy(raw["strategy"]),
                model_id=str(raw.get("model_id", "published")),
                answer=str(raw.get("answer", "")),
                semantic_similarity=float(raw["semantic_similarity"]),
                meteor=(None if raw.get("meteor") is None else float(raw["meteor"])),
                total_tokens=int(raw["total_tokens"]),
                context_tokens=int(raw.get("context_tokens", raw["total_tokens"])),
            )
            result.validate()
        except (KeyError, ValueError, TypeError) as exc:
            raise FixtureError(f"{loc}: {exc}") from exc
        results.append(result)

    note_sizes = {}
    for raw in payload.get("notes", []):
        note_sizes[str(raw["id"])] = int(raw["token_size"])
    metadata = payload.get("metadata", {})
    remarks = [str(r) for r in metadata.get("remarks", [])]
    return FixtureData(
        results=results, note_sizes=note_sizes, remarks=remarks, metadata=metadata
    )


def replay_fixture(path: str | Path) -> list[EvalResult]:
    return load_fixture(path).results
