"""Command-line interface.

Subcommands: generate, run, evaluate, report, sweep, replay, serve.
Exit codes: 0 success, 2 configuration or input error, 3 partial provider
failures, 4 total provider failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from clearbench.analysis import (
    build_report_tables,
    render_report,
    sizes_from_results,
    sweep,
    sweep_csv,
)
from clearbench.corpus import CorpusError, load_corpus, save_corpus
from clearbench.generator import FACT_POSITIONS, build_default_corpus
from clearbench.metrics import note_sizes, win_table
from clearbench.runconfig import ConfigError, RunConfig
from clearbench.runner import (
    FixtureError,
    default_fixture_path,
    eval_results,
    exit_code_for,
    load_fixture,
    load_records,
    run_matrix,
    save_records,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3
EXIT_TOTAL = 4


def _parse_grid(spec: str) -> list[float]:
    try:
        start_s, end_s, step_s = spec.split(":")
        start, end, step = float(start_s), float(end_s), float(step_s)
    except ValueError as exc:
        raise ConfigError(f"bad grid {spec!r}, expected start:end:step") from exc
    if step <= 0 or end < start:
        raise ConfigError(f"bad grid {spec!r}: need step > 0 and end >= start")
    values = []
    i = 0
    while True:
        value = round(start + i * step, 10)
        if value > end + 1e-9:
            break
        values.append(value)
        i += 1
    return values


def _load_results(args) -> tuple[list, dict[str, int], list[str]]:
    records = load_records(args.results)
    results = eval_results(records)
    if not results:
        raise ConfigError(f"no successful results in {args.results}")
    if getattr(args, "corpus", None):
        sizes = note_sizes(load_corpus(args.corpus))
    else:
        sizes = sizes_from_results(results)
    return results, sizes, []


def cmd_generate(args) -> int:
    corpus = build_default_corpus(args.seed, fact_position=args.fact_position)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus.notes)} notes and {len(corpus.questions)} questions to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    config = RunConfig.from_file(args.config)
    if args.out:
        config.out_path = args.out
    records = run_matrix(config)
    save_records(records, config.out_path)
    failures = sum(1 for r in records if not r.ok)
    print(f"wrote {len(records)} records to {config.out_path} ({failures} failures)")
    return exit_code_for(records)


def cmd_evaluate(args) -> int:
    results, sizes, _ = _load_results(args)
    table = win_table(results)
    print(f"cases: {table.cases}")
    for strategy, stats in table.stats.items():
        savings = (
            f"  savings_vs_wide={100 * stats.token_savings_vs_wide:.1f}%"
            if stats.token_savings_vs_wide is not None
            else ""
        )
        print(
            f"{strategy.display:6s} wins={stats.wins}/{table.cases}"
            f" win_rate={100 * stats.win_rate:.1f}%"
            f" mean_sim={stats.mean_similarity:.3f}"
            f" mean_tokens={stats.mean_tokens:,.0f}{savings}"
        )
    return EXIT_OK


def cmd_report(args) -> int:
    results, sizes, remarks = _load_results(args)
    tables = build_report_tables(results, sizes, remarks)
    sweep_result = sweep(results, _parse_grid(args.grid)) if args.grid else None
    fmt = "markdown" if args.format == "md" else "csv"
    document = render_report(tables, sweep_result, fmt)
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
        print(f"wrote report to {args.out}")
    else:
        print(document)
    return EXIT_OK


def cmd_sweep(args) -> int:
    results, _, _ = _load_results(args)
    result = sweep(results, _parse_grid(args.grid), mode=args.mode)
    document = sweep_csv(result)
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
        print(f"wrote sweep to {args.out}")
    else:
        print(document)
    return EXIT_OK


def cmd_replay(args) -> int:
    fixture = load_fixture(args.fixture)
    tables = build_report_tables(fixture.results, fixture.note_sizes, fixture.remarks)
    sweep_result = sweep(fixture.results, _parse_grid(args.grid)) if args.grid else None
    fmt = "markdown" if args.format == "md" else "csv"
    document = render_report(tables, sweep_result, fmt)
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
        print(f"wrote report to {args.out}")
    else:
        print(document)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from clearbench.service import build_app

    app = build_app(
        corpus_path=args.corpus,
        results_path=args.results,
        fixture_path=args.fixture,
        config_path=args.config,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clearbench",
        description="Entity-aware clinical QA retrieval engine and evaluation platform",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate the default synthetic corpus")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="corpus.json")
    p.add_argument("--fact-position", choices=FACT_POSITIONS, default="middle")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run the strategy x model matrix")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override the configured output path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("evaluate", help="summarize a results log")
    p.add_argument("--results", required=True)
    p.add_argument("--corpus", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="render the report tables")
    p.add_argument("--results", required=True)
    p.add_argument("--corpus", default=None)
    p.add_argument("--format", choices=("md", "csv"), default="md")
    p.add_argument("--grid", default=None, help="optional bonus grid start:end:step")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sweep", help="efficiency-bonus sweep over a results log")
    p.add_argument("--results", required=True)
    p.add_argument("--grid", default="0:0.2:0.01")
    p.add_argument("--mode", choices=("per_note", "corpus"), default="per_note")
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="replay published results from a fixture")
    p.add_argument("--fixture", default=str(default_fixture_path()))
    p.add_argument("--format", choices=("md", "csv"), default="md")
    p.add_argument("--grid", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="start the experiment service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--corpus", default=None)
    p.add_argument("--results", default=None)
    p.add_argument("--fixture", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CorpusError, FixtureError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
