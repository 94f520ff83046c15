from __future__ import annotations

import itertools
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clearbench.metrics import (
    EvalResult,
    bucket_analysis,
    case_winner,
    cosine,
    meteor,
    meteor_alignment,
    token_savings,
    win_table,
)
from clearbench.corpus import SizeClass
from clearbench.retrieval import Strategy
from clearbench.runner import load_fixture, default_fixture_path


def meteor_alignment_oracle(cand: list[str], ref: list[str]) -> tuple[int, int]:
    """Enumerate every maximum one-to-one unigram alignment and take the
    minimum chunk count. Exponential; only usable for short inputs."""
    m = sum((Counter(cand) & Counter(ref)).values())
    if m == 0:
        return 0, 0
    n = len(cand)
    best = [n + len(ref) + 1]

    def chunks_of(pairs: list[tuple[int, int]]) -> int:
        pairs = sorted(pairs)
        count = 0
        prev = None
        for ci, rj in pairs:
            if prev is None or not (ci == prev[0] + 1 and rj == prev[1] + 1):
                count += 1
            prev = (ci, rj)
        return count

    def rec(i: int, used: frozenset[int], pairs: tuple):
        if len(pairs) + (n - i) < m:
            return
        if i == n:
            if len(pairs) == m:
                best[0] = min(best[0], chunks_of(list(pairs)))
            return
        rec(i + 1, used, pairs)
        for j, w in enumerate(ref):
            if w == cand[i] and j not in used:
                rec(i + 1, used | {j}, pairs + ((i, j),))

    rec(0, frozenset(), ())
    return m, best[0]


def naive_cosine(a, b) -> float:
    num = sum(x * y for x, y in zip(a, b))
    na = sum(x * x for x in a) ** 0.5
    nb = sum(y * y for y in b) ** 0.5
    if na == 0 or nb == 0:
        return 0.0
    return num / (na * nb)


class TestCosine:
    def test_identity(self):
        v = np.array([1.0, 2.0, 3.0])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_zero_vector_convention(self):
        assert cosine(np.zeros(4), np.array([1.0, 0, 0, 0])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cosine(np.zeros(3), np.zeros(4))

    def test_matches_naive_oracle(self):
        rng = random.Random(1)
        for _ in range(50):
            a = np.array([rng.uniform(-2, 2) for _ in range(16)])
            b = np.array([rng.uniform(-2, 2) for _ in range(16)])
            assert cosine(a, b) == pytest.approx(naive_cosine(a, b), abs=1e-12)


class TestMeteor:
    def test_identical_ten_word_strings(self):
        text = " ".join(f"word{i}" for i in range(10))
        # m=10, chunks=1 -> 1 * (1 - 0.5 * 0.1**3)
        assert meteor(text, text) == pytest.approx(0.9995, abs=1e-12)

    def test_zero_overlap(self):
        assert meteor("alpha beta", "gamma delta") == 0.0
        assert meteor("", "anything here") == 0.0
        assert meteor("anything", "") == 0.0

    def test_single_word_identity_matches_formula(self):
        # penalty = 0.5 * (1/1)**3; the formula allows no higher value
        assert meteor("anemia", "anemia") == pytest.approx(0.5)

    def test_reversed_scores_below_in_order(self):
        ref = "one two three four five six seven eight"
        cand = " ".join(reversed(ref.split()))
        assert meteor(cand, ref) < meteor(ref, ref)
        m, chunks = meteor_alignment(cand.split(), ref.split())
        m_o, chunks_o = meteor_alignment_oracle(cand.split(), ref.split())
        assert (m, chunks) == (m_o, chunks_o) == (8, 8)

    def test_identity_near_one_for_eight_plus_words(self):
        rng = random.Random(2)
        vocab = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
        for _ in range(25):
            words = [rng.choice(vocab) for _ in range(rng.randint(8, 60))]
            text = " ".join(words)
            assert meteor(text, text) >= 0.999

    @given(
        st.lists(st.sampled_from("abc"), min_size=0, max_size=6),
        st.lists(st.sampled_from("abc"), min_size=0, max_size=6),
    )
    @settings(max_examples=400, deadline=None)
    def test_alignment_matches_bruteforce_small(self, cand, ref):
        assert meteor_alignment(cand, ref) == meteor_alignment_oracle(cand, ref)

    def test_alignment_exhaustive_binary_vocab(self):
        words = ["a", "b"]
        seqs = [
            list(p)
            for L in range(0, 5)
            for p in itertools.product(words, repeat=L)
        ]
        for cand in seqs:
            for ref in seqs:
                assert meteor_alignment(cand, ref) == meteor_alignment_oracle(cand, ref)

    def test_bounds(self):
        rng = random.Random(3)
        vocab = ["a", "b", "c", "d", "e"]
        for _ in range(100):
            cand = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 12)))
            ref = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 12)))
            assert 0.0 <= meteor(cand, ref) <= 1.0

    def test_long_input_greedy_path(self):
        # beyond the exact-search limit the greedy cover takes over; identity
        # still collapses to a single chunk
        text = " ".join(f"tok{i}" for i in range(300))
        assert meteor(text, text) >= 0.999
        shuffled = text.split()
        random.Random(0).shuffle(shuffled)
        assert 0.0 < meteor(" ".join(shuffled), text) < 1.0


class TestTokenSavings:
    def test_published_pairs(self):
        assert 100 * token_savings(8_456, 39_173) == pytest.approx(78.4, abs=0.05)
        assert 100 * token_savings(544, 39_173) == pytest.approx(98.6, abs=0.05)

    def test_identity(self):
        assert token_savings(1234, 1234) == 0.0

    def test_rejects_nonpositive_wide(self):
        with pytest.raises(ValueError):
            token_savings(10, 0)
        with pytest.raises(ValueError):
            token_savings(10, -5)

    def test_antitone_in_strategy_tokens(self):
        values = [token_savings(t, 10_000) for t in (100, 1_000, 5_000, 10_000)]
        assert values == sorted(values, reverse=True)


def _result(note, question, strategy, sim, tokens, model="m"):
    return EvalResult(
        note_id=note,
        question_id=question,
        strategy=strategy,
        model_id=model,
        answer="",
        semantic_similarity=sim,
        meteor=None,
        total_tokens=tokens,
        context_tokens=tokens,
    )


@pytest.fixture(scope="module")
def fixture_data():
    return load_fixture(default_fixture_path())


class TestWinTable:
    def test_fixture_wins(self, fixture_data):
        table = win_table(fixture_data.results)
        wins = {s.display: st.wins for s, st in table.stats.items()}
        assert wins == {"CLEAR": 8, "Wide": 3, "RAG": 1}
        assert table.cases == 12

    def test_fixture_mean_tokens_and_savings(self, fixture_data):
        table = win_table(fixture_data.results)
        clear = table.stats[Strategy.CLEAR]
        assert clear.mean_tokens == pytest.approx(8_456, abs=1)
        assert 100 * clear.token_savings_vs_wide == pytest.approx(78.4, abs=0.5)
        assert table.stats[Strategy.WIDE].token_savings_vs_wide == pytest.approx(0.0)

    def test_fixture_mean_similarities(self, fixture_data):
        table = win_table(fixture_data.results)
        assert table.stats[Strategy.CLEAR].mean_similarity == pytest.approx(0.884, abs=1e-3)
        assert table.stats[Strategy.WIDE].mean_similarity == pytest.approx(0.858, abs=1e-3)
        assert table.stats[Strategy.RAG].mean_similarity == pytest.approx(0.832, abs=1e-3)

    def test_tie_broken_by_fewer_tokens(self):
        rows = [
            _result("n", "q", Strategy.WIDE, 0.9, 1000),
            _result("n", "q", Strategy.RAG, 0.9, 100),
            _result("n", "q", Strategy.CLEAR, 0.9, 500),
        ]
        table = win_table(rows)
        assert table.stats[Strategy.RAG].wins == 1

    def test_full_tie_fixed_order(self):
        rows = [
            _result("n", "q", Strategy.WIDE, 0.9, 100),
            _result("n", "q", Strategy.RAG, 0.9, 100),
            _result("n", "q", Strategy.CLEAR, 0.9, 100),
        ]
        assert case_winner({r.strategy: r for r in rows}) == Strategy.CLEAR
        rows = rows[:2]
        assert case_winner({r.strategy: r for r in rows}) == Strategy.RAG

    def test_incomplete_case_named(self):
        rows = [
            _result("n1", "q", Strategy.WIDE, 0.9, 100),
            _result("n1", "q", Strategy.CLEAR, 0.8, 100),
            _result("n2", "q", Strategy.WIDE, 0.9, 100),
        ]
        with pytest.raises(ValueError, match="n2"):
            win_table(rows)

    def test_duplicate_result_rejected(self):
        rows = [
            _result("n1", "q", Strategy.WIDE, 0.9, 100),
            _result("n1", "q", Strategy.WIDE, 0.8, 100),
        ]
        with pytest.raises(ValueError, match="more than one"):
            win_table(rows)

    def test_win_rates_sum_to_one(self, fixture_data):
        table = win_table(fixture_data.results)
        assert sum(st.win_rate for st in table.stats.values()) == pytest.approx(1.0, abs=1e-9)
        assert sum(st.wins for st in table.stats.values()) == table.cases

    def test_small_corpus_matches_per_case_oracle(self):
        rng = random.Random(7)
        for _ in range(30):
            n_cases = rng.randint(1, 5)
            rows = []
            for c in range(n_cases):
                for s in (Strategy.WIDE, Strategy.RAG, Strategy.CLEAR):
                    rows.append(
                        _result(f"n{c}", "q", s, round(rng.random(), 3), rng.randint(10, 1000))
                    )
            table = win_table(rows)
            expected = {Strategy.WIDE: 0, Strategy.RAG: 0, Strategy.CLEAR: 0}
            for c in range(n_cases):
                per = {r.strategy: r for r in rows if r.note_id == f"n{c}"}
                ranked = sorted(
                    per.values(),
                    key=lambda r: (
                        -r.semantic_similarity,
                        r.total_tokens,
                        -{"clear": 2, "rag": 1, "wide": 0}[r.strategy.value],
                    ),
                )
                expected[ranked[0].strategy] += 1
            assert {s: table.stats[s].wins for s in expected} == expected


class TestBucketAnalysis:
    def test_fixture_buckets(self, fixture_data):
        buckets = bucket_analysis(fixture_data.results, fixture_data.note_sizes)
        clear_wins = {k.value: v.stats[Strategy.CLEAR].wins for k, v in buckets.items()}
        assert clear_wins == {"Small": 3, "Medium": 2, "Large": 3}
        assert all(v.cases == 4 for v in buckets.values())
        assert list(buckets) == [SizeClass.SMALL, SizeClass.MEDIUM, SizeClass.LARGE]

    def test_accepts_corpus(self, default_corpus):
        rows = []
        for note in default_corpus.notes:
            for s in (Strategy.WIDE, Strategy.RAG, Strategy.CLEAR):
                rows.append(_result(note.id, "q", s, 0.5, 100))
        buckets = bucket_analysis(rows, default_corpus)
        assert {k.value for k in buckets} == {"Small", "Medium", "Large"}

    def test_unknown_note_rejected(self, fixture_data):
        with pytest.raises(ValueError, match="ghost"):
            bucket_analysis(
                [_result("ghost", "q", Strategy.WIDE, 0.5, 10)], fixture_data.note_sizes
            )


class TestEvalResultValidation:
    def test_bounds(self):
        with pytest.raises(ValueError):
            _result("n", "q", Strategy.WIDE, 1.5, 10).validate()
        bad = _result("n", "q", Strategy.WIDE, 0.5, 10)
        bad.context_tokens = 20
        with pytest.raises(ValueError):
            bad.validate()
