"""Section parsing and priority weighting for clinical documents.

Sections tile the note's word-index space: every word belongs to exactly one
section, headings included. Text before the first heading becomes a synthetic
PREAMBLE section.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from clearbench.text import canonical_heading, is_heading

PREAMBLE = "PREAMBLE"

# Anchor weights: ASSESSMENT and PLAN carry full priority, the history of
# present illness slightly less. Everything else is a tunable default; the
# table can be overridden from the run configuration.
DEFAULT_WEIGHTS: dict[str, float] = {
    "ASSESSMENT": 1.0,
    "PLAN": 1.0,
    "HISTORY OF PRESENT ILLNESS": 0.9,
    "CHIEF COMPLAINT": 0.8,
    "MEDICATIONS": 0.8,
    "LABORATORY": 0.8,
    "PHYSICAL EXAM": 0.7,
    "PAST MEDICAL HISTORY": 0.7,
    "FAMILY HISTORY": 0.6,
    "SOCIAL HISTORY": 0.5,
    PREAMBLE: 0.5,
}
DEFAULT_FALLBACK_WEIGHT = 0.5


@dataclass(frozen=True)
class SectionWeightTable:
    weights: dict[str, float]
    default_weight: float = DEFAULT_FALLBACK_WEIGHT

    def __post_init__(self):
        for name, w in self.weights.items():
            if not 0.0 < w <= 1.0:
                raise ValueError(f"weight for {name!r} must be in (0, 1], got {w}")
        if not 0.0 < self.default_weight <= 1.0:
            raise ValueError("default_weight must be in (0, 1]")

    @classmethod
    def default(cls) -> "SectionWeightTable":
        return cls(weights=dict(DEFAULT_WEIGHTS))

    def with_overrides(self, overrides: dict[str, float]) -> "SectionWeightTable":
        merged = dict(self.weights)
        for name, w in overrides.items():
            merged[canonical_heading(name)] = float(w)
        return SectionWeightTable(weights=merged, default_weight=self.default_weight)


@dataclass(frozen=True)
class Section:
    name: str
    start_word: int
    end_word: int
    weight: float
    start_char: int
    end_char: int


def weight_of(name: str, table: SectionWeightTable) -> float:
    """Exact-match weight lookup on the canonicalized heading name."""
    return table.weights.get(canonical_heading(name), table.default_weight)


def parse_sections(
    text: str, table: SectionWeightTable | None = None
) -> list[Section]:
    """Split a note into weighted sections at heading lines.

    Returns sections tiling [0, word_count) in document order. Headingless
    text yields a single PREAMBLE section; empty text yields no sections.
    """
    if table is None:
        table = SectionWeightTable.default()
    if not text.split():
        return []

    # (name, word offset of heading line, char offset of heading line)
    boundaries: list[tuple[str, int, int]] = []
    word_offset = 0
    char_offset = 0
    for line in text.splitlines(keepends=True):
        if is_heading(line):
            boundaries.append((canonical_heading(line), word_offset, char_offset))
        word_offset += len(line.split())
        char_offset += len(line)
    total_words = word_offset
    total_chars = len(text)

    sections: list[Section] = []
    if not boundaries or boundaries[0][1] > 0:
        first_word = boundaries[0][1] if boundaries else total_words
        first_char = boundaries[0][2] if boundaries else total_chars
        if first_word > 0:
            sections.append(
                Section(
                    name=PREAMBLE,
                    start_word=0,
                    end_word=first_word,
                    weight=weight_of(PREAMBLE, table),
                    start_char=0,
                    end_char=first_char,
                )
            )
    for i, (name, start_word, start_char) in enumerate(boundaries):
        if i + 1 < len(boundaries):
            end_word, end_char = boundaries[i + 1][1], boundaries[i + 1][2]
        else:
            end_word, end_char = total_words, total_chars
        sections.append(
            Section(
                name=name,
                start_word=start_word,
                end_word=end_word,
                weight=weight_of(name, table),
                start_char=start_char,
                end_char=end_char,
            )
        )
    return sections


def section_at(sections: list[Section], word_index: int) -> Section:
    """The unique section whose word range contains ``word_index``."""
    if not sections:
        raise IndexError("no sections")
    if word_index < 0 or word_index >= sections[-1].end_word:
        raise IndexError(
            f"word index {word_index} outside [0, {sections[-1].end_word})"
        )
    starts = [s.start_word for s in sections]
    return sections[bisect_right(starts, word_index) - 1]
