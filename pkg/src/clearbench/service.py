"""HTTP/JSON API backing the interactive prompt workbench.

Exposes the corpus, ad-hoc experiment execution with preset or custom
prompts, the preset list, and aggregated report data. Every response
carries the engine configuration hash so clients can attribute scores to
settings. Mock-provider experiments run synchronously; remote providers get
a job id to poll.
"""

from __future__ import annotations

import threading
import uuid
from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from clearbench.analysis import DEFAULT_BONUS_GRID, sweep
from clearbench.corpus import Corpus, load_corpus
from clearbench.generator import build_default_corpus
from clearbench.metrics import EvalResult, bucket_analysis, note_sizes, win_table
from clearbench.prompts import PRESETS, PromptPreset, preset_by_id
from clearbench.providers import AnswerRequest, ProviderError
from clearbench.retrieval import PromptError, Strategy, validate_templates
from clearbench.runconfig import RunConfig
from clearbench.runner import Engine, eval_results, load_fixture, load_records, make_provider

PREVIEW_CHARS = 1_000


class ExperimentRequest(BaseModel):
    note_id: str
    question_id: str
    strategy: str
    model_id: str = "mock-model"
    preset_id: str | None = None
    system_template: str | None = None
    user_template: str | None = None


class ServiceState:
    def __init__(self, corpus: Corpus, engine: Engine, provider, synchronous: bool):
        self.corpus = corpus
        self.engine = engine
        self.provider = provider
        self.synchronous = synchronous
        self.log: list[EvalResult] = []
        self.jobs: dict[str, dict] = {}
        self.lock = threading.Lock()

    def append(self, result: EvalResult) -> None:
        with self.lock:
            self.log.append(result)

    def snapshot(self) -> list[EvalResult]:
        with self.lock:
            return list(self.log)


def _resolve_templates(req: ExperimentRequest) -> tuple[str, str, str | None]:
    custom = req.system_template is not None or req.user_template is not None
    if (req.preset_id is None) == (not custom):
        raise HTTPException(
            status_code=422,
            detail="provide exactly one of preset_id or custom system/user templates",
        )
    if req.preset_id is not None:
        try:
            preset = preset_by_id(req.preset_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown preset {req.preset_id!r}")
        return preset.system_template, preset.user_template, preset.id
    system = req.system_template or ""
    user = req.user_template or ""
    try:
        validate_templates(system, user)
    except PromptError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return system, user, None


def _preset_payload(preset: PromptPreset) -> dict:
    return {
        "id": preset.id,
        "name": preset.name,
        "description": preset.description,
        "system_template": preset.system_template,
        "user_template": preset.user_template,
    }


def build_app(
    corpus: Corpus | None = None,
    corpus_path: str | None = None,
    results_path: str | None = None,
    fixture_path: str | None = None,
    config_path: str | None = None,
    provider=None,
    force_jobs: bool = False,
) -> FastAPI:
    if corpus is None:
        corpus = load_corpus(corpus_path) if corpus_path else build_default_corpus(42)
    if config_path:
        config = RunConfig.from_file(config_path)
    else:
        config = RunConfig(corpus_path=corpus_path or "<generated>")
    engine = Engine(config)
    if provider is None:
        provider = make_provider(config)
    synchronous = getattr(provider, "kind", "mock") == "mock" and not force_jobs
    state = ServiceState(corpus, engine, provider, synchronous)

    if results_path:
        for result in eval_results(load_records(results_path)):
            state.append(result)
    if fixture_path:
        for result in load_fixture(fixture_path).results:
            state.append(result)

    app = FastAPI(title="clearbench service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = state

    @app.middleware("http")
    async def add_config_hash(request, call_next):
        response = await call_next(request)
        response.headers["X-Config-Hash"] = engine.config_hash
        return response

    @app.get("/api/corpus")
    def get_corpus(full: int = 0):
        notes = []
        for note in state.corpus.notes:
            entry = {
                "id": note.id,
                "token_size": note.token_size,
                "size_class": note.size_class.value,
            }
            if full:
                entry["text"] = note.text
            else:
                entry["preview"] = note.text[:PREVIEW_CHARS]
            notes.append(entry)
        return {
            "notes": notes,
            "questions": [
                {"id": q.id, "text": q.text, "gold_answer": q.gold_answer}
                for q in state.corpus.questions
            ],
            "config_hash": engine.config_hash,
        }

    @app.get("/api/presets")
    def get_presets():
        return {
            "presets": [_preset_payload(p) for p in PRESETS],
            "config_hash": engine.config_hash,
        }

    def execute(req: ExperimentRequest, system: str, user: str, preset_id: str | None) -> dict:
        note = state.corpus.note(req.note_id)
        question = state.corpus.question(req.question_id)
        strategy = Strategy(req.strategy)
        context = state.engine.build_context(note, question, strategy)
        response = state.provider.generate_answer(
            AnswerRequest(
                model_id=req.model_id,
                system_template=system,
                user_template=user,
                context=context,
                question=question,
            )
        )
        similarity, meteor_score = state.engine.score_answer(response.text, question)
        result = EvalResult(
            note_id=note.id,
            question_id=question.id,
            strategy=strategy,
            model_id=req.model_id,
            answer=response.text,
            semantic_similarity=similarity,
            meteor=meteor_score,
            total_tokens=response.total_tokens,
            context_tokens=context.context_tokens,
        )
        result.validate()
        state.append(result)
        return {
            "request_id": uuid.uuid4().hex,
            "note_id": note.id,
            "question_id": question.id,
            "strategy": strategy.value,
            "model_id": req.model_id,
            "preset_id": preset_id,
            "answer": response.text,
            "semantic_similarity": similarity,
            "meteor": meteor_score,
            "prompt_tokens": response.prompt_tokens,
            "completion_tokens": response.completion_tokens,
            "total_tokens": response.total_tokens,
            "context_tokens": context.context_tokens,
            "context": {
                "segments": [
                    {
                        "text": seg.text,
                        "start_word": seg.start_word,
                        "end_word": seg.end_word,
                        "score": seg.score,
                    }
                    for seg in context.segments
                ],
                "provenance": context.provenance,
            },
            "config_hash": engine.config_hash,
            "created_at": datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
        }

    @app.post("/api/experiments")
    def post_experiment(req: ExperimentRequest, response: Response):
        system, user, preset_id = _resolve_templates(req)
        try:
            state.corpus.note(req.note_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown note {req.note_id!r}")
        try:
            state.corpus.question(req.question_id)
        except KeyError:
            raise HTTPException(
                status_code=404, detail=f"unknown question {req.question_id!r}"
            )
        try:
            Strategy(req.strategy)
        except ValueError:
            raise HTTPException(status_code=422, detail=f"unknown strategy {req.strategy!r}")

        if state.synchronous:
            try:
                return execute(req, system, user, preset_id)
            except ProviderError as exc:
                raise HTTPException(
                    status_code=502,
                    detail={"error_class": exc.error_class, "message": str(exc)},
                )
        job_id = uuid.uuid4().hex
        state.jobs[job_id] = {"status": "pending"}

        def worker():
            try:
                state.jobs[job_id] = {"status": "done", "result": execute(req, system, user, preset_id)}
            except ProviderError as exc:
                state.jobs[job_id] = {
                    "status": "error",
                    "error_class": exc.error_class,
                    "error": str(exc),
                }

        threading.Thread(target=worker, daemon=True).start()
        response.status_code = 202
        return {"job_id": job_id, "status": "pending", "config_hash": engine.config_hash}

    @app.get("/api/experiments/{job_id}")
    def poll_experiment(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return {"job_id": job_id, "config_hash": engine.config_hash, **job}

    @app.get("/api/report")
    def get_report():
        results = state.snapshot()
        # keep the latest result per cell, then only cases covering every
        # strategy seen anywhere in the log
        latest: dict[tuple[str, str, Strategy], EvalResult] = {}
        for r in results:
            latest[(r.note_id, r.question_id, r.strategy)] = r
        strategies = {key[2] for key in latest}
        cases: dict[tuple[str, str], dict[Strategy, EvalResult]] = {}
        for (note_id, question_id, strategy), r in latest.items():
            cases.setdefault((note_id, question_id), {})[strategy] = r
        complete = [
            r
            for per in cases.values()
            if set(per) == strategies
            for r in per.values()
        ]
        payload = {
            "config_hash": engine.config_hash,
            "experiments_logged": len(results),
            "complete_cases": 0,
            "win_table": None,
            "buckets": {},
            "sweep": None,
        }
        if not complete:
            return payload
        table = win_table(complete)
        sizes = dict(note_sizes(state.corpus))
        from clearbench.analysis import sizes_from_results

        sizes.update(sizes_from_results(complete))
        payload["complete_cases"] = table.cases
        payload["win_table"] = _win_table_payload(table)
        payload["buckets"] = {
            size_class.value: _win_table_payload(bucket)
            for size_class, bucket in bucket_analysis(complete, sizes).items()
        }
        if Strategy.WIDE in strategies:
            sweep_result = sweep(complete, DEFAULT_BONUS_GRID)
            payload["sweep"] = {
                "grid": sweep_result.grid,
                "mode": sweep_result.mode,
                "strategies": [s.value for s in sweep_result.strategies],
                "mean_adjusted": {
                    s.value: values for s, values in sweep_result.mean_adjusted.items()
                },
                "winners": [s.value for s in sweep_result.winners],
                "per_case_winners": sweep_result.per_case_winners,
                "crossovers": sweep_result.crossovers,
            }
        return payload

    return app


def _win_table_payload(table) -> dict:
    return {
        "cases": table.cases,
        "strategies": {
            s.value: {
                "wins": st.wins,
                "win_rate": st.win_rate,
                "mean_similarity": st.mean_similarity,
                "mean_tokens": st.mean_tokens,
                "token_savings_vs_wide": st.token_savings_vs_wide,
            }
            for s, st in table.stats.items()
        },
        "winners": {
            "|".join(case): s.value for case, s in table.winners.items()
        },
    }
