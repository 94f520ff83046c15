"""Entity-centered retrieval: windows, alignment scoring, merging, packing.

Pipeline: parse sections, extract entities, build fixed-radius word windows
around each entity, score each window, merge overlapping windows, then pack
merged spans greedily by score under the token budget.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

from clearbench.corpus import ClinicalNote, Question, count_tokens
from clearbench.entities import ClinicalEntity, Lexicon, extract_entities
from clearbench.metrics import cosine
from clearbench.retrieval import (
    ContextPackage,
    Segment,
    Strategy,
    TokenBudget,
    make_package,
)
from clearbench.sections import Section, SectionWeightTable, parse_sections, section_at
from clearbench.text import split_words

DEFAULT_RADIUS_WORDS = 150
DEFAULT_MERGE_GAP_WORDS = 10


@dataclass(frozen=True)
class WindowConfig:
    radius_words: int = DEFAULT_RADIUS_WORDS
    align_weight: float = 0.5
    section_weight: float = 0.25
    confidence_weight: float = 0.15
    relationship_bonus: float = 0.10
    merge_gap_words: int = DEFAULT_MERGE_GAP_WORDS

    def __post_init__(self):
        if self.radius_words < 1:
            raise ValueError("radius_words must be >= 1")
        weights = (
            self.align_weight,
            self.section_weight,
            self.confidence_weight,
            self.relationship_bonus,
        )
        if any(w < 0 for w in weights):
            raise ValueError("scoring weights must be nonnegative")
        if self.align_weight + self.section_weight + self.confidence_weight <= 0:
            raise ValueError("at least one of the first three weights must be positive")
        if self.merge_gap_words < 0:
            raise ValueError("merge_gap_words must be nonnegative")


@dataclass
class EntityWindow:
    anchor: ClinicalEntity
    start_word: int
    end_word: int
    text: str
    section_name: str
    score: float = 0.0


@dataclass
class MergedSpan:
    start_word: int
    end_word: int
    score: float
    anchor_count: int


def build_windows(
    note_text_words: list[str],
    entities: list[ClinicalEntity],
    sections: list[Section],
    radius_words: int,
) -> list[EntityWindow]:
    """Fixed-radius windows around each entity, clamped at document edges."""
    n = len(note_text_words)
    windows = []
    for entity in entities:
        start = max(0, entity.start_word - radius_words)
        end = min(n, entity.end_word + radius_words)
        section = section_at(sections, entity.start_word)
        windows.append(
            EntityWindow(
                anchor=entity,
                start_word=start,
                end_word=end,
                text=" ".join(note_text_words[start:end]),
                section_name=section.name,
            )
        )
    return windows


def score_window(
    window: EntityWindow,
    question: Question,
    embedder,
    *,
    config: WindowConfig,
    section_weight: float,
    distinct_categories: int,
    question_vec: np.ndarray | None = None,
) -> float:
    """Weighted blend of question alignment, section priority, anchor
    confidence and a cross-category co-occurrence bonus."""
    if question_vec is None:
        question_vec = embedder.embed(question.text)
    alignment = cosine(question_vec, embedder.embed(window.text))
    relationship = 1.0 if distinct_categories >= 2 else 0.0
    return (
        config.align_weight * alignment
        + config.section_weight * section_weight
        + config.confidence_weight * window.anchor.confidence
        + config.relationship_bonus * relationship
    )


def merge_windows(
    windows: list[EntityWindow], merge_gap_words: int = DEFAULT_MERGE_GAP_WORDS
) -> list[MergedSpan]:
    """Union of overlapping or near-adjacent window spans.

    Spans separated by a gap of at most ``merge_gap_words`` words merge; a
    merged span keeps the maximum member score. Output is sorted by start.
    """
    if not windows:
        return []
    ordered = sorted(windows, key=lambda w: (w.start_word, w.end_word))
    merged: list[MergedSpan] = []
    for w in ordered:
        if merged and w.start_word <= merged[-1].end_word + merge_gap_words:
            last = merged[-1]
            last.end_word = max(last.end_word, w.end_word)
            last.score = max(last.score, w.score)
            last.anchor_count += 1
        else:
            merged.append(
                MergedSpan(
                    start_word=w.start_word,
                    end_word=w.end_word,
                    score=w.score,
                    anchor_count=1,
                )
            )
    return merged


def _entities_inside(
    entities: list[ClinicalEntity], start: int, end: int
) -> list[ClinicalEntity]:
    starts = [e.start_word for e in entities]
    lo = bisect_left(starts, start)
    hi = bisect_right(starts, end)
    return [e for e in entities[lo:hi] if e.start_word >= start and e.end_word <= end]


def greedy_select(
    spans: list[MergedSpan], span_tokens: list[int], budget_tokens: int
) -> list[int]:
    """Indices of spans chosen greedily by descending score, skipping any
    span that would push the running total past the budget."""
    order = sorted(
        range(len(spans)), key=lambda i: (-spans[i].score, spans[i].start_word)
    )
    chosen: list[int] = []
    total = 0
    for i in order:
        if total + span_tokens[i] <= budget_tokens:
            chosen.append(i)
            total += span_tokens[i]
    return sorted(chosen, key=lambda i: spans[i].start_word)


def retrieve_clear(
    note: ClinicalNote,
    question: Question,
    lexicon: Lexicon | None = None,
    weight_table: SectionWeightTable | None = None,
    config: WindowConfig | None = None,
    budget: TokenBudget | None = None,
    embedder=None,
) -> ContextPackage:
    """Entity-window retrieval under a hard token budget.

    Zero-entity notes fall back to the highest-weight section truncated to
    the budget; the fallback is recorded in provenance.
    """
    if embedder is None:
        raise ValueError("an embedder is required")
    config = config or WindowConfig()
    budget = budget or TokenBudget()
    weight_table = weight_table or SectionWeightTable.default()

    words = split_words(note.text)
    provenance: dict = {"note_id": note.id, "fallback": None}
    if not words:
        return make_package(Strategy.CLEAR, [], provenance=provenance)

    sections = parse_sections(note.text, weight_table)
    entities = extract_entities(note.text, lexicon)
    # token count of words[i:j] equals prefix[j] - prefix[i]; joining with a
    # single space never adds tokens
    prefix = [0]
    for w in words:
        prefix.append(prefix[-1] + count_tokens(w))

    if not entities:
        return _fallback_package(note, words, sections, prefix, budget, provenance)

    windows = build_windows(words, entities, sections, config.radius_words)
    question_vec = embedder.embed(question.text)
    section_weights = {s.name: s.weight for s in sections}
    for w in windows:
        inside = _entities_inside(entities, w.start_word, w.end_word)
        w.score = score_window(
            w,
            question,
            embedder,
            config=config,
            section_weight=section_weights[w.section_name],
            distinct_categories=len({e.category for e in inside}),
            question_vec=question_vec,
        )

    merged = merge_windows(windows, config.merge_gap_words)
    span_tokens = [prefix[s.end_word] - prefix[s.start_word] for s in merged]
    chosen = greedy_select(merged, span_tokens, budget.max_context_tokens)

    if not chosen:
        # No merged span fits; keep the package non-empty by truncating the
        # best-scoring span to the budget.
        top = max(range(len(merged)), key=lambda i: (merged[i].score, -merged[i].start_word))
        span = merged[top]
        end = span.start_word
        while (
            end < span.end_word
            and prefix[end + 1] - prefix[span.start_word] <= budget.max_context_tokens
        ):
            end += 1
        if end == span.start_word:
            return make_package(Strategy.CLEAR, [], provenance=provenance)
        provenance["fallback"] = "truncated_top_span"
        segments = [
            Segment(
                text=" ".join(words[span.start_word : end]),
                start_word=span.start_word,
                end_word=end,
                score=span.score,
            )
        ]
        return make_package(Strategy.CLEAR, segments, provenance=provenance)

    segments = [
        Segment(
            text=" ".join(words[merged[i].start_word : merged[i].end_word]),
            start_word=merged[i].start_word,
            end_word=merged[i].end_word,
            score=merged[i].score,
        )
        for i in chosen
    ]
    provenance.update(
        {
            "n_entities": len(entities),
            "n_windows": len(windows),
            "n_merged_spans": len(merged),
            "selected_spans": [
                {
                    "start_word": merged[i].start_word,
                    "end_word": merged[i].end_word,
                    "score": round(merged[i].score, 6),
                    "anchor_count": merged[i].anchor_count,
                }
                for i in chosen
            ],
        }
    )
    return make_package(Strategy.CLEAR, segments, provenance=provenance)


def _fallback_package(
    note: ClinicalNote,
    words: list[str],
    sections: list[Section],
    prefix: list[int],
    budget: TokenBudget,
    provenance: dict,
) -> ContextPackage:
    best = max(sections, key=lambda s: (s.weight, -s.start_word))
    end = best.start_word
    while (
        end < best.end_word
        and prefix[end + 1] - prefix[best.start_word] <= budget.max_context_tokens
    ):
        end += 1
    provenance["fallback"] = "highest_weight_section"
    provenance["fallback_section"] = best.name
    segments = (
        [
            Segment(
                text=" ".join(words[best.start_word : end]),
                start_word=best.start_word,
                end_word=end,
                score=best.weight,
            )
        ]
        if end > best.start_word
        else []
    )
    return make_package(Strategy.CLEAR, segments, provenance=provenance)
