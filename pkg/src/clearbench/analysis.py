"""Efficiency-bonus simulation, crossover detection and report rendering."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from clearbench.corpus import SizeClass
from clearbench.metrics import (
    EvalResult,
    WinTable,
    TIE_PRIORITY,
    bucket_analysis,
    case_winner,
    win_table,
)
from clearbench.retrieval import Strategy

DEFAULT_BONUS_GRID = [round(0.01 * i, 2) for i in range(21)]  # 0.00 .. 0.20

# Paper-style column orders.
_OVERALL_ORDER = [Strategy.CLEAR, Strategy.WIDE, Strategy.RAG]
_SIM_ORDER = [Strategy.WIDE, Strategy.RAG, Strategy.CLEAR]


def adjusted_score(sim: float, tokens: float, wide_tokens: float, bonus: float) -> float:
    """Convex blend of answer quality and token savings.

    bonus = 0 returns the similarity unchanged; bonus = 1 scores token
    savings alone. Linear and monotone in both inputs, so any strategy pair
    has at most one crossover as the bonus grows.
    """
    if wide_tokens <= 0:
        raise ValueError("wide_tokens must be positive")
    if not 0.0 <= bonus <= 1.0:
        raise ValueError("bonus must lie in [0, 1]")
    return (1.0 - bonus) * sim + bonus * (1.0 - tokens / wide_tokens)


@dataclass
class SweepResult:
    grid: list[float]
    mode: str
    strategies: list[Strategy]
    mean_adjusted: dict[Strategy, list[float]]
    winners: list[Strategy]
    per_case_winners: list[dict[str, str]]
    crossovers: list[dict]


def _case_table(results: list[EvalResult]) -> dict[tuple[str, str], dict[Strategy, EvalResult]]:
    win_table(results)  # completeness validation
    cases: dict[tuple[str, str], dict[Strategy, EvalResult]] = {}
    for r in results:
        cases.setdefault((r.note_id, r.question_id), {})[r.strategy] = r
    return dict(sorted(cases.items()))


def _rank_key(mean_adj: float, mean_tokens: float, strategy: Strategy):
    return (mean_adj, -mean_tokens, TIE_PRIORITY[strategy])


def sweep(
    results: list[EvalResult],
    bonus_grid: list[float] | None = None,
    mode: str = "per_note",
) -> SweepResult:
    """Re-rank strategies across a grid of efficiency bonuses.

    ``per_note`` applies the bonus to each case against that case's wide
    token usage and ranks by corpus mean; ``corpus`` applies it to
    strategy-level aggregates. A crossover is the smallest grid bonus at
    which a pair's corpus-level ordering differs from its bonus-zero order.
    """
    grid = list(bonus_grid) if bonus_grid is not None else list(DEFAULT_BONUS_GRID)
    if not grid:
        raise ValueError("bonus grid is empty")
    if any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])):
        raise ValueError("bonus grid must be strictly increasing")
    if mode not in ("per_note", "corpus"):
        raise ValueError("mode must be per_note or corpus")

    cases = _case_table(results)
    strategies = sorted({r.strategy for r in results}, key=lambda s: -TIE_PRIORITY[s])
    if Strategy.WIDE not in strategies:
        raise ValueError("sweep requires wide-context results as the token baseline")

    mean_tokens = {
        s: float(np.mean([per[s].total_tokens for per in cases.values()]))
        for s in strategies
    }
    mean_sim = {
        s: float(np.mean([per[s].semantic_similarity for per in cases.values()]))
        for s in strategies
    }

    def corpus_means(bonus: float) -> dict[Strategy, float]:
        if mode == "corpus":
            wide = mean_tokens[Strategy.WIDE]
            return {
                s: adjusted_score(mean_sim[s], mean_tokens[s], wide, bonus)
                for s in strategies
            }
        out = {}
        for s in strategies:
            values = [
                adjusted_score(
                    per[s].semantic_similarity,
                    per[s].total_tokens,
                    per[Strategy.WIDE].total_tokens,
                    bonus,
                )
                for per in cases.values()
            ]
            out[s] = float(np.mean(values))
        return out

    def order_sign(means: dict[Strategy, float], a: Strategy, b: Strategy) -> int:
        ka = _rank_key(means[a], mean_tokens[a], a)
        kb = _rank_key(means[b], mean_tokens[b], b)
        return 1 if ka > kb else -1

    base_means = corpus_means(0.0)
    mean_adjusted: dict[Strategy, list[float]] = {s: [] for s in strategies}
    winners: list[Strategy] = []
    per_case_winners: list[dict[str, str]] = []
    pair_flips: dict[tuple[Strategy, Strategy], float] = {}

    for bonus in grid:
        means = corpus_means(bonus)
        for s in strategies:
            mean_adjusted[s].append(means[s])
        winners.append(
            max(strategies, key=lambda s: _rank_key(means[s], mean_tokens[s], s))
        )
        case_rows: dict[str, str] = {}
        for key, per in cases.items():
            wide_tokens = per[Strategy.WIDE].total_tokens
            best = max(
                per,
                key=lambda s: (
                    adjusted_score(
                        per[s].semantic_similarity, per[s].total_tokens, wide_tokens, bonus
                    ),
                    -per[s].total_tokens,
                    TIE_PRIORITY[s],
                ),
            )
            case_rows["|".join(key)] = best.value
        per_case_winners.append(case_rows)
        for i, a in enumerate(strategies):
            for b in strategies[i + 1 :]:
                pair = (a, b)
                if pair in pair_flips:
                    continue
                if order_sign(means, a, b) != order_sign(base_means, a, b):
                    pair_flips[pair] = bonus

    crossovers = [
        {"pair": (a.value, b.value), "bonus": bonus}
        for (a, b), bonus in sorted(pair_flips.items(), key=lambda kv: kv[1])
    ]
    return SweepResult(
        grid=grid,
        mode=mode,
        strategies=strategies,
        mean_adjusted=mean_adjusted,
        winners=winners,
        per_case_winners=per_case_winners,
        crossovers=crossovers,
    )


@dataclass
class ReportTables:
    overall: WinTable
    per_note_rows: list[dict]
    buckets: dict[SizeClass, WinTable]
    remarks: list[str] = field(default_factory=list)


def sizes_from_results(results: list[EvalResult]) -> dict[str, int]:
    """Note sizes recovered from wide-context rows (their context equals the
    note's token count)."""
    sizes: dict[str, int] = {}
    for r in results:
        if r.strategy == Strategy.WIDE:
            sizes[r.note_id] = max(sizes.get(r.note_id, 0), r.context_tokens)
    return sizes


def build_report_tables(
    results: list[EvalResult],
    sizes: dict[str, int] | None = None,
    remarks: list[str] | None = None,
) -> ReportTables:
    if sizes is None:
        sizes = sizes_from_results(results)
    overall = win_table(results)
    buckets = bucket_analysis(results, sizes)

    by_note: dict[str, dict[Strategy, list[EvalResult]]] = {}
    note_order: list[str] = []
    for r in results:
        if r.note_id not in by_note:
            by_note[r.note_id] = {}
            note_order.append(r.note_id)
        by_note[r.note_id].setdefault(r.strategy, []).append(r)

    rows = []
    for note_id in note_order:
        per = by_note[note_id]
        sims = {
            s: float(np.mean([r.semantic_similarity for r in rs]))
            for s, rs in per.items()
        }
        tokens = {s: float(np.mean([r.total_tokens for r in rs])) for s, rs in per.items()}
        best = max(
            sims, key=lambda s: (sims[s], -tokens[s], TIE_PRIORITY[s])
        )
        rows.append(
            {
                "note_id": note_id,
                "size": sizes.get(note_id, 0),
                "sims": sims,
                "best": best,
                "clear_tokens": (
                    int(round(tokens[Strategy.CLEAR])) if Strategy.CLEAR in tokens else None
                ),
            }
        )
    return ReportTables(
        overall=overall, per_note_rows=rows, buckets=buckets, remarks=list(remarks or [])
    )


def _overall_rows(table: WinTable) -> list[list[str]]:
    rows = []
    for s in _OVERALL_ORDER:
        if s not in table.stats:
            continue
        st = table.stats[s]
        savings = (
            f"{100 * st.token_savings_vs_wide:.1f}"
            if st.token_savings_vs_wide is not None
            else ""
        )
        rows.append(
            [
                s.display,
                f"{st.wins}/{table.cases}",
                f"{100 * st.win_rate:.1f}",
                f"{st.mean_similarity:.3f}",
                f"{st.mean_tokens:,.0f}",
                savings,
            ]
        )
    return rows

_OVERALL_HEADER = [
    "Strategy",
    "Wins",
    "Win Rate %",
    "Avg Semantic Sim.",
    "Avg Tokens",
    "Token Savings vs Wide %",
]


def _markdown_table(header: list[str], rows: list[list[str]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("|" + "|".join(" --- " for _ in header) + "|")
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return lines


def render_report(
    tables: ReportTables, sweep_result: SweepResult | None = None, format: str = "markdown"
) -> str:
    """Byte-stable report with the overall, per-note, bucket and sweep
    tables."""
    if format == "markdown":
        return _render_markdown(tables, sweep_result)
    if format == "csv":
        return _render_csv(tables, sweep_result)
    raise ValueError(f"unknown report format {format!r}")


def _per_note_header(tables: ReportTables) -> tuple[list[str], list[Strategy]]:
    present = [
        s for s in _SIM_ORDER if any(s in row["sims"] for row in tables.per_note_rows)
    ]
    header = (
        ["Note ID", "Size"]
        + [f"{s.display} Sim." for s in present]
        + ["Best Strategy", "CLEAR Tokens"]
    )
    return header, present


def _render_markdown(tables: ReportTables, sweep_result: SweepResult | None) -> str:
    lines = ["# Retrieval Strategy Evaluation", ""]
    lines.append(f"Cases evaluated: {tables.overall.cases}")
    lines.append("")
    lines.append("## Overall")
    lines.append("")
    lines.extend(_markdown_table(_OVERALL_HEADER, _overall_rows(tables.overall)))
    lines.append("")

    header, present = _per_note_header(tables)
    lines.append("## By Note")
    lines.append("")
    note_rows = []
    for row in tables.per_note_rows:
        note_rows.append(
            [
                row["note_id"],
                f"{row['size']:,}",
                *(f"{row['sims'][s]:.3f}" if s in row["sims"] else "" for s in present),
                row["best"].display,
                f"{row['clear_tokens']:,}" if row["clear_tokens"] is not None else "",
            ]
        )
    lines.extend(_markdown_table(header, note_rows))
    lines.append("")

    lines.append("## By Size Class")
    lines.append("")
    for size_class, table in tables.buckets.items():
        lines.append(f"### {size_class.value} ({table.cases} cases)")
        lines.append("")
        lines.extend(_markdown_table(_OVERALL_HEADER, _overall_rows(table)))
        lines.append("")

    lines.append("## Efficiency Sweep")
    lines.append("")
    if sweep_result is None:
        lines.append("no sweep requested")
        lines.append("")
    else:
        header = ["Bonus"] + [s.display for s in sweep_result.strategies] + ["Winner"]
        rows = []
        for i, bonus in enumerate(sweep_result.grid):
            rows.append(
                [f"{bonus:.2f}"]
                + [f"{sweep_result.mean_adjusted[s][i]:.4f}" for s in sweep_result.strategies]
                + [sweep_result.winners[i].display]
            )
        lines.extend(_markdown_table(header, rows))
        lines.append("")
        if sweep_result.crossovers:
            for cross in sweep_result.crossovers:
                a, b = cross["pair"]
                lines.append(
                    f"- Ordering of {a} vs {b} flips at bonus {cross['bonus']:.2f}"
                )
        else:
            lines.append("- No ordering changes on this grid")
        lines.append("")

    if tables.remarks:
        lines.append("## Remarks")
        lines.append("")
        for remark in tables.remarks:
            lines.append(f"- {remark}")
        lines.append("")
    return "\n".join(lines)


def _render_csv(tables: ReportTables, sweep_result: SweepResult | None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["table", *_OVERALL_HEADER])
    for row in _overall_rows(tables.overall):
        writer.writerow(["overall", *row])
    header, present = _per_note_header(tables)
    writer.writerow([])
    writer.writerow(["table", *header])
    for row in tables.per_note_rows:
        writer.writerow(
            [
                "by_note",
                row["note_id"],
                row["size"],
                *(f"{row['sims'][s]:.3f}" if s in row["sims"] else "" for s in present),
                row["best"].display,
                row["clear_tokens"] if row["clear_tokens"] is not None else "",
            ]
        )
    writer.writerow([])
    writer.writerow(["table", "size_class", *_OVERALL_HEADER])
    for size_class, table in tables.buckets.items():
        for row in _overall_rows(table):
            writer.writerow(["bucket", size_class.value, *row])
    writer.writerow([])
    if sweep_result is None:
        writer.writerow(["sweep", "no sweep requested"])
    else:
        writer.writerow(["table", "bonus", "strategy", "mean_adjusted", "winner"])
        for i, bonus in enumerate(sweep_result.grid):
            for s in sweep_result.strategies:
                writer.writerow(
                    [
                        "sweep",
                        f"{bonus:.2f}",
                        s.display,
                        f"{sweep_result.mean_adjusted[s][i]:.6f}",
                        sweep_result.winners[i].display,
                    ]
                )
    for remark in tables.remarks:
        writer.writerow(["remark", remark])
    return buf.getvalue()


def sweep_csv(sweep_result: SweepResult) -> str:
    """The standalone sweep artifact: bonus, strategy, mean_adjusted, winner."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bonus", "strategy", "mean_adjusted", "winner"])
    for i, bonus in enumerate(sweep_result.grid):
        for s in sweep_result.strategies:
            writer.writerow(
                [
                    f"{bonus:.2f}",
                    s.display,
                    f"{sweep_result.mean_adjusted[s][i]:.6f}",
                    sweep_result.winners[i].display,
                ]
            )
    return buf.getvalue()
