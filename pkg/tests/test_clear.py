from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clearbench.clear import (
    EntityWindow,
    MergedSpan,
    WindowConfig,
    build_windows,
    greedy_select,
    merge_windows,
    retrieve_clear,
    score_window,
)
from clearbench.corpus import ClinicalNote, Question, count_tokens
from clearbench.entities import ClinicalEntity, EntityCategory, Lexicon
from clearbench.retrieval import Strategy, TokenBudget
from clearbench.sections import SectionWeightTable, parse_sections

QUESTION = Question(id="q", text="anemia detected earlier history", gold_answer="gold")


def window(start, end, score=0.0, text="x"):
    anchor = ClinicalEntity(
        surface="x",
        category=EntityCategory.SYMPTOM,
        start_word=start,
        end_word=min(end, start + 1),
        confidence=0.85,
    )
    return EntityWindow(
        anchor=anchor,
        start_word=start,
        end_word=end,
        text=text,
        section_name="PREAMBLE",
        score=score,
    )


def union_oracle(spans: list[tuple[int, int]], gap: int, universe: int) -> list[tuple[int, int]]:
    """Merge via per-word membership: mark every covered word, bridge gaps of
    at most ``gap`` words, then read maximal runs back off."""
    covered = [False] * universe
    for start, end in spans:
        for i in range(start, end):
            covered[i] = True
    for i in range(universe):
        if covered[i]:
            continue
        prev = any(covered[max(0, i - gap) : i])
        nxt = any(covered[i + 1 : i + 1 + gap])
        # a gap word bridges only when covered on both sides within reach
        if prev and nxt:
            j = i
            while j < universe and not covered[j]:
                j += 1
            if j < universe and j - i <= gap and i > 0 and covered[i - 1]:
                for k in range(i, j):
                    covered[k] = True
    out = []
    i = 0
    while i < universe:
        if covered[i]:
            j = i
            while j < universe and covered[j]:
                j += 1
            out.append((i, j))
            i = j
        else:
            i += 1
    return out


class TestScoreWindow:
    def test_pure_alignment_self_similarity(self, embedder):
        config = WindowConfig(align_weight=1.0, section_weight=0, confidence_weight=0, relationship_bonus=0)
        w = window(0, 4, text=QUESTION.text)
        score = score_window(
            w, QUESTION, embedder, config=config, section_weight=0.5, distinct_categories=1
        )
        assert score == pytest.approx(1.0, abs=1e-9)

    def test_pure_section_weight_assessment(self, embedder):
        config = WindowConfig(align_weight=0, section_weight=1.0, confidence_weight=0, relationship_bonus=0)
        w = window(0, 4, text="whatever words here")
        score = score_window(
            w, QUESTION, embedder, config=config, section_weight=1.0, distinct_categories=1
        )
        assert score == pytest.approx(1.0)

    def test_relationship_bonus_is_exactly_delta(self, embedder):
        config = WindowConfig()
        w = window(0, 4, text="same text both times")
        kwargs = dict(config=config, section_weight=0.7, question_vec=None)
        multi = score_window(w, QUESTION, embedder, distinct_categories=2, **kwargs)
        single = score_window(w, QUESTION, embedder, distinct_categories=1, **kwargs)
        assert multi - single == pytest.approx(config.relationship_bonus)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            WindowConfig(radius_words=0)
        with pytest.raises(ValueError):
            WindowConfig(align_weight=-0.1)
        with pytest.raises(ValueError):
            WindowConfig(align_weight=0, section_weight=0, confidence_weight=0)


class TestMergeWindows:
    def test_overlap_union(self):
        merged = merge_windows([window(10, 60, 0.4), window(40, 90, 0.9)])
        assert [(m.start_word, m.end_word) for m in merged] == [(10, 90)]
        assert merged[0].score == 0.9
        assert merged[0].anchor_count == 2

    def test_disjoint_far_apart_unchanged(self):
        merged = merge_windows([window(0, 20), window(100, 130)])
        assert [(m.start_word, m.end_word) for m in merged] == [(0, 20), (100, 130)]

    def test_adjacent_within_gap_merges(self):
        merged = merge_windows([window(0, 20), window(29, 40)], merge_gap_words=10)
        assert [(m.start_word, m.end_word) for m in merged] == [(0, 40)]
        merged = merge_windows([window(0, 20), window(31, 40)], merge_gap_words=10)
        assert len(merged) == 2

    def test_empty(self):
        assert merge_windows([]) == []

    @given(
        st.lists(
            st.tuples(st.integers(0, 180), st.integers(1, 60)),
            min_size=1,
            max_size=12,
        ),
        st.integers(0, 12),
    )
    @settings(max_examples=200)
    def test_matches_interval_union_oracle(self, raw_spans, gap):
        spans = [(s, min(200, s + length)) for s, length in raw_spans]
        windows = [window(s, e) for s, e in spans]
        merged = [(m.start_word, m.end_word) for m in merge_windows(windows, gap)]
        assert merged == union_oracle(spans, gap, 220)


class TestGreedySelect:
    def test_skip_does_not_stop(self):
        spans = [
            MergedSpan(0, 10, score=0.9, anchor_count=1),
            MergedSpan(20, 30, score=0.8, anchor_count=1),
            MergedSpan(40, 50, score=0.7, anchor_count=1),
        ]
        # budget fits first and third but not second
        chosen = greedy_select(spans, [50, 60, 40], budget_tokens=95)
        assert chosen == [0, 2]

    def test_matches_independent_greedy_trace(self):
        rng = random.Random(9)
        for _ in range(50):
            n = rng.randint(1, 12)
            spans = [
                MergedSpan(i * 20, i * 20 + 10, score=rng.random(), anchor_count=1)
                for i in range(n)
            ]
            tokens = [rng.randint(5, 40) for _ in spans]
            budget = rng.randint(0, 200)
            order = sorted(range(n), key=lambda i: (-spans[i].score, spans[i].start_word))
            total, expected = 0, []
            for i in order:
                if total + tokens[i] <= budget:
                    expected.append(i)
                    total += tokens[i]
            assert greedy_select(spans, tokens, budget) == sorted(
                expected, key=lambda i: spans[i].start_word
            )

    def test_budget_monotone_for_uniform_span_sizes(self):
        # with equal-cost spans no displacement can occur, so growing the
        # budget only ever adds spans
        rng = random.Random(4)
        spans = [
            MergedSpan(i * 20, i * 20 + 10, score=rng.random(), anchor_count=1)
            for i in range(12)
        ]
        tokens = [25] * len(spans)
        previous: set[int] = set()
        for budget in range(0, 400, 25):
            chosen = set(greedy_select(spans, tokens, budget))
            assert previous <= chosen
            previous = chosen


def toy_note(words: list[str]) -> ClinicalNote:
    return ClinicalNote.from_text("toy", " ".join(words))


def toy_lexicon(terms: list[str]) -> Lexicon:
    return Lexicon({EntityCategory.DISEASE: terms}, [])


class TestRetrieveClear:
    def test_small_note_single_clamped_segment(self, embedder):
        words = ["filler"] * 40
        words[20] = "anemia"
        note = toy_note(words)
        pkg = retrieve_clear(
            note,
            QUESTION,
            lexicon=toy_lexicon(["anemia"]),
            embedder=embedder,
        )
        assert pkg.strategy == Strategy.CLEAR
        assert len(pkg.segments) == 1
        seg = pkg.segments[0]
        assert (seg.start_word, seg.end_word) == (0, 40)
        assert seg.text == note.text

    def test_budget_forces_single_best_span(self, embedder):
        # two entities far apart; budget only fits one merged span, and the
        # chosen one must carry the maximum score
        words = ["pad"] * 400
        words[50] = "anemia"
        words[350] = "gout"
        note = toy_note(words)
        lexicon = toy_lexicon(["anemia", "gout"])
        config = WindowConfig(radius_words=30)
        budget = TokenBudget(max_context_tokens=70)
        pkg = retrieve_clear(
            note, QUESTION, lexicon=lexicon, config=config, budget=budget, embedder=embedder
        )
        assert len(pkg.segments) == 1
        # brute force: score both merged spans independently
        from clearbench.entities import extract_entities

        entities = extract_entities(note.text, lexicon)
        sections = parse_sections(note.text)
        windows = build_windows(note.text.split(), entities, sections, config.radius_words)
        qv = embedder.embed(QUESTION.text)
        for w in windows:
            w.score = score_window(
                w, QUESTION, embedder, config=config, section_weight=0.5,
                distinct_categories=1, question_vec=qv,
            )
        merged = merge_windows(windows, config.merge_gap_words)
        best = max(merged, key=lambda m: m.score)
        assert (pkg.segments[0].start_word, pkg.segments[0].end_word) == (
            best.start_word,
            best.end_word,
        )

    def test_budget_safety_and_anchor_containment(self, embedder, lexicon, default_corpus):
        note = default_corpus.notes[0]
        q = default_corpus.questions[0]
        pkg = retrieve_clear(note, q, lexicon=lexicon, embedder=embedder)
        assert pkg.context_tokens <= TokenBudget().max_context_tokens
        from clearbench.entities import extract_entities

        entities = extract_entities(note.text, lexicon)
        for seg in pkg.segments:
            assert any(
                seg.start_word <= e.start_word and e.end_word <= seg.end_word
                for e in entities
            )

    def test_budget_enlargement_keeps_spans(self, embedder, lexicon, default_corpus):
        note = default_corpus.notes[1]
        q = default_corpus.questions[0]
        small = retrieve_clear(
            note, q, lexicon=lexicon, budget=TokenBudget(4_000), embedder=embedder
        )
        large = retrieve_clear(
            note, q, lexicon=lexicon, budget=TokenBudget(8_500), embedder=embedder
        )
        small_spans = {(s.start_word, s.end_word) for s in small.segments}
        large_spans = {(s.start_word, s.end_word) for s in large.segments}
        assert small_spans <= large_spans

    def test_window_radius_exact_except_clamped(self, embedder, lexicon, default_corpus):
        note = default_corpus.notes[0]
        words = note.text.split()
        from clearbench.entities import extract_entities

        entities = extract_entities(note.text, lexicon)
        sections = parse_sections(note.text)
        radius = WindowConfig().radius_words
        for e, w in zip(entities, build_windows(words, entities, sections, radius)):
            if w.start_word > 0:
                assert e.start_word - w.start_word == radius
            if w.end_word < len(words):
                assert w.end_word - e.end_word == radius

    def test_zero_entity_fallback(self, embedder):
        note = ClinicalNote.from_text(
            "plain",
            "PREFACE NOTES:\n" + " ".join(["plain"] * 30) + "\nASSESSMENT:\n" + " ".join(["calm"] * 40),
        )
        pkg = retrieve_clear(
            note, QUESTION, lexicon=toy_lexicon(["zzz"]), embedder=embedder
        )
        assert pkg.provenance["fallback"] == "highest_weight_section"
        assert pkg.provenance["fallback_section"] == "ASSESSMENT"
        assert len(pkg.segments) == 1

    def test_zero_entity_fallback_respects_budget(self, embedder):
        note = ClinicalNote.from_text("plain", "ASSESSMENT:\n" + " ".join(["calm"] * 500))
        budget = TokenBudget(max_context_tokens=50)
        pkg = retrieve_clear(
            note, QUESTION, lexicon=toy_lexicon(["zzz"]), budget=budget, embedder=embedder
        )
        assert 0 < pkg.context_tokens <= 50

    def test_truncation_when_no_span_fits(self, embedder):
        words = ["pad"] * 120
        words[60] = "anemia"
        note = toy_note(words)
        pkg = retrieve_clear(
            note,
            QUESTION,
            lexicon=toy_lexicon(["anemia"]),
            config=WindowConfig(radius_words=50),
            budget=TokenBudget(max_context_tokens=30),
            embedder=embedder,
        )
        assert pkg.provenance["fallback"] == "truncated_top_span"
        assert 0 < pkg.context_tokens <= 30

    def test_empty_note(self, embedder, lexicon):
        note = ClinicalNote.from_text("empty", "")
        pkg = retrieve_clear(note, QUESTION, lexicon=lexicon, embedder=embedder)
        assert pkg.segments == [] and pkg.context_tokens == 0

    def test_deterministic(self, embedder, lexicon, default_corpus):
        note = default_corpus.notes[3]
        q = default_corpus.questions[1]
        a = retrieve_clear(note, q, lexicon=lexicon, embedder=embedder)
        b = retrieve_clear(note, q, lexicon=lexicon, embedder=embedder)
        assert a == b
