"""Evaluation metrics: semantic similarity, METEOR, token efficiency, wins.

METEOR here is the exact-match stage only: unigram alignment maximizing
matches and then minimizing chunks, harmonic precision/recall mean with
alpha=0.9 and a fragmentation penalty gamma*(chunks/m)**beta (beta=3.0,
gamma=0.5). Stem and synonym stages are out of scope.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from clearbench.corpus import Corpus, SizeClass, classify_size
from clearbench.retrieval import Strategy

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Exact chunk minimization is exponential in the worst case; beyond this many
# unigrams per side the greedy longest-common-block cover takes over.
_EXACT_CHUNK_LIMIT = 10

# Deterministic tie order for winners: CLEAR beats RAG beats Wide.
TIE_PRIORITY = {Strategy.CLEAR: 2, Strategy.RAG: 1, Strategy.WIDE: 0}


@dataclass
class EvalResult:
    note_id: str
    question_id: str
    strategy: Strategy
    model_id: str
    answer: str
    semantic_similarity: float
    meteor: float | None
    total_tokens: int
    context_tokens: int

    def validate(self) -> None:
        if not 0.0 <= self.semantic_similarity <= 1.0:
            raise ValueError("semantic_similarity out of [0, 1]")
        if self.meteor is not None and not 0.0 <= self.meteor <= 1.0:
            raise ValueError("meteor out of [0, 1]")
        if not 0 <= self.context_tokens <= self.total_tokens:
            raise ValueError("need total_tokens >= context_tokens >= 0")


@dataclass
class StrategyStats:
    strategy: Strategy
    wins: int
    win_rate: float
    mean_similarity: float
    mean_tokens: float
    token_savings_vs_wide: float | None


@dataclass
class WinTable:
    cases: int
    stats: dict[Strategy, StrategyStats]
    winners: dict[tuple[str, str], Strategy]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; zero vector on either side yields 0.0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def meteor(
    candidate: str,
    reference: str,
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    cand = _tokens(candidate)
    ref = _tokens(reference)
    m, chunks = meteor_alignment(cand, ref)
    if m == 0:
        return 0.0
    precision = m / len(cand)
    recall = m / len(ref)
    f_mean = precision * recall / (alpha * precision + (1.0 - alpha) * recall)
    penalty = gamma * (chunks / m) ** beta
    return f_mean * (1.0 - penalty)


def meteor_alignment(cand: list[str], ref: list[str]) -> tuple[int, int]:
    """(matches, chunks) of the alignment maximizing matches, then minimizing
    chunks. Exact search for short inputs, greedy block cover beyond."""
    matches = sum((Counter(cand) & Counter(ref)).values())
    if matches == 0:
        return 0, 0
    if cand == ref:
        return matches, 1
    if len(cand) <= _EXACT_CHUNK_LIMIT and len(ref) <= _EXACT_CHUNK_LIMIT:
        return matches, _min_chunks_exact(tuple(cand), tuple(ref))
    return matches, _min_chunks_greedy(cand, ref)


def _min_chunks_exact(cand: tuple[str, ...], ref: tuple[str, ...]) -> int:
    n, m = len(cand), len(ref)

    @lru_cache(maxsize=None)
    def remaining_matches(cmask: int, rmask: int) -> int:
        cc = Counter(cand[i] for i in range(n) if cmask >> i & 1)
        rc = Counter(ref[j] for j in range(m) if rmask >> j & 1)
        return sum((cc & rc).values())

    @lru_cache(maxsize=None)
    def solve(cmask: int, rmask: int) -> int:
        if remaining_matches(cmask, rmask) == 0:
            return 0
        rc = Counter(ref[j] for j in range(m) if rmask >> j & 1)
        cc = Counter(cand[i] for i in range(n) if cmask >> i & 1)
        first = next(
            i for i in range(n) if cmask >> i & 1 and rc.get(cand[i], 0) > 0
        )
        word = cand[first]
        best = n + m
        if cc[word] > rc[word]:  # surplus occurrence may stay unmatched
            best = solve(cmask & ~(1 << first), rmask)
        for j in range(m):
            if not (rmask >> j & 1) or ref[j] != word:
                continue
            max_len = 0
            while (
                first + max_len < n
                and j + max_len < m
                and cmask >> (first + max_len) & 1
                and rmask >> (j + max_len) & 1
                and cand[first + max_len] == ref[j + max_len]
            ):
                max_len += 1
            for length in range(1, max_len + 1):
                nc = cmask
                nr = rmask
                for k in range(length):
                    nc &= ~(1 << (first + k))
                    nr &= ~(1 << (j + k))
                best = min(best, 1 + solve(nc, nr))
        return best

    return solve((1 << n) - 1, (1 << m) - 1)


def _min_chunks_greedy(cand: list[str], ref: list[str]) -> int:
    vocab: dict[str, int] = {}
    c_ids = np.array([vocab.setdefault(w, len(vocab)) for w in cand], dtype=np.int32)
    r_ids = np.array([vocab.setdefault(w, len(vocab)) for w in ref], dtype=np.int32)
    c_avail = np.ones(len(cand), dtype=bool)
    r_avail = np.ones(len(ref), dtype=bool)
    chunks = 0
    while True:
        length, ci, rj = _longest_common_block(c_ids, r_ids, c_avail, r_avail)
        if length < 2:
            break
        chunks += 1
        c_avail[ci : ci + length] = False
        r_avail[rj : rj + length] = False
    rest_c = Counter(w for w, ok in zip(cand, c_avail) if ok)
    rest_r = Counter(w for w, ok in zip(ref, r_avail) if ok)
    return chunks + sum((rest_c & rest_r).values())


def _longest_common_block(c_ids, r_ids, c_avail, r_avail) -> tuple[int, int, int]:
    m = len(r_ids)
    best_len, best_ci, best_rj = 0, 0, 0
    prev = np.zeros(m, dtype=np.int32)
    for i in range(len(c_ids)):
        if not c_avail[i]:
            prev = np.zeros(m, dtype=np.int32)
            continue
        eq = (r_ids == c_ids[i]) & r_avail
        cur = np.zeros(m, dtype=np.int32)
        if eq[0]:
            cur[0] = 1
        cur[1:] = np.where(eq[1:], prev[:-1] + 1, 0)
        j = int(np.argmax(cur))
        length = int(cur[j])
        if length > best_len:
            best_len = length
            best_ci = i - length + 1
            best_rj = j - length + 1
        prev = cur
    return best_len, best_ci, best_rj


def token_savings(strategy_tokens: float, wide_tokens: float) -> float:
    """Fractional token savings relative to wide-context usage."""
    if wide_tokens <= 0:
        raise ValueError("wide_tokens must be positive")
    return 1.0 - strategy_tokens / wide_tokens


def _group_cases(
    results: list[EvalResult],
) -> dict[tuple[str, str], dict[Strategy, EvalResult]]:
    cases: dict[tuple[str, str], dict[Strategy, EvalResult]] = {}
    for r in results:
        key = (r.note_id, r.question_id)
        per_strategy = cases.setdefault(key, {})
        if r.strategy in per_strategy:
            raise ValueError(
                f"case {key} has more than one {r.strategy.display} result"
            )
        per_strategy[r.strategy] = r
    return cases


def case_winner(per_strategy: dict[Strategy, EvalResult]) -> Strategy:
    """Highest similarity wins; ties prefer fewer total tokens, then the
    fixed order CLEAR > RAG > Wide."""
    return max(
        per_strategy,
        key=lambda s: (
            per_strategy[s].semantic_similarity,
            -per_strategy[s].total_tokens,
            TIE_PRIORITY[s],
        ),
    )


def win_table(results: list[EvalResult]) -> WinTable:
    if not results:
        raise ValueError("no results to tabulate")
    cases = _group_cases(results)
    strategies = sorted({r.strategy for r in results}, key=lambda s: -TIE_PRIORITY[s])
    for key, per_strategy in cases.items():
        missing = [s.display for s in strategies if s not in per_strategy]
        if missing:
            raise ValueError(f"case {key} is missing strategies: {missing}")

    winners = {key: case_winner(per) for key, per in sorted(cases.items())}
    n_cases = len(cases)
    stats: dict[Strategy, StrategyStats] = {}
    mean_tokens = {
        s: float(np.mean([per[s].total_tokens for per in cases.values()]))
        for s in strategies
    }
    wide_mean = mean_tokens.get(Strategy.WIDE)
    for s in strategies:
        wins = sum(1 for w in winners.values() if w == s)
        sims = [per[s].semantic_similarity for per in cases.values()]
        stats[s] = StrategyStats(
            strategy=s,
            wins=wins,
            win_rate=wins / n_cases,
            mean_similarity=float(np.mean(sims)),
            mean_tokens=mean_tokens[s],
            token_savings_vs_wide=(
                token_savings(mean_tokens[s], wide_mean) if wide_mean else None
            ),
        )
    return WinTable(cases=n_cases, stats=stats, winners=winners)


def note_sizes(source) -> dict[str, int]:
    """Note-id to token-size mapping from a Corpus or a plain mapping."""
    if isinstance(source, Corpus):
        return {n.id: n.token_size for n in source.notes}
    return {str(k): int(v) for k, v in dict(source).items()}


def bucket_analysis(results: list[EvalResult], corpus) -> dict[SizeClass, WinTable]:
    """Win tables restricted to each note size class.

    ``corpus`` may be a Corpus or any mapping of note id to token size (the
    latter is what fixture replays provide).
    """
    sizes = note_sizes(corpus)
    order = {SizeClass.SMALL: 0, SizeClass.MEDIUM: 1, SizeClass.LARGE: 2}
    buckets: dict[SizeClass, list[EvalResult]] = {}
    for r in results:
        if r.note_id not in sizes:
            raise ValueError(f"no token size known for note {r.note_id!r}")
        buckets.setdefault(classify_size(sizes[r.note_id]), []).append(r)
    return {
        size_class: win_table(rows)
        for size_class, rows in sorted(buckets.items(), key=lambda kv: order[kv[0]])
    }
