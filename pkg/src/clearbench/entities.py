"""Rule-based clinical entity extraction.

Two sources of matches: exact (case-insensitive) lexicon lookups on word
boundaries, and regex value patterns for vitals and laboratory measurements.
Overlaps are resolved globally, longest match first.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from clearbench.text import canonical_word, char_span_to_word_span, split_words, word_spans


class EntityCategory(str, Enum):
    MEDICATION = "Medication"
    SYMPTOM = "Symptom"
    DISEASE = "Disease"
    PROCEDURE = "Procedure"
    LAB_VALUE = "LabValue"
    ANATOMY = "Anatomy"


class MatchKind(str, Enum):
    EXACT_MULTI_WORD = "exact_multi_word"
    EXACT_SINGLE_WORD = "exact_single_word"
    VALUE_PATTERN = "value_pattern"


_LEXICON_KEYS = {
    "medications": EntityCategory.MEDICATION,
    "symptoms": EntityCategory.SYMPTOM,
    "diseases": EntityCategory.DISEASE,
    "procedures": EntityCategory.PROCEDURE,
    "lab_values": EntityCategory.LAB_VALUE,
    "anatomy": EntityCategory.ANATOMY,
}

# Stable priority for resolving same-length, same-start collisions.
_CATEGORY_RANK = {c: i for i, c in enumerate(EntityCategory)}


@dataclass
class ClinicalEntity:
    surface: str
    category: EntityCategory
    start_word: int
    end_word: int
    confidence: float
    numeric_value: float | None = None
    unit: str | None = None

    def __post_init__(self):
        if self.start_word >= self.end_word:
            raise ValueError("entity span must be non-empty")
        if not 0.0 < self.confidence <= 1.0:
            raise ValueError("confidence must be in (0, 1]")
        if self.numeric_value is not None and self.category != EntityCategory.LAB_VALUE:
            raise ValueError("numeric_value is only valid for LabValue entities")


@dataclass(frozen=True)
class ValuePattern:
    name: str
    pattern: re.Pattern
    unit: str


class Lexicon:
    """Per-category term lists plus named value patterns.

    Terms are stored lowercase-canonical as word tuples; multi-word terms are
    matched as consecutive canonical words.
    """

    def __init__(
        self,
        terms: dict[EntityCategory, list[str]],
        value_patterns: list[ValuePattern],
    ):
        self._by_prefix: dict[str, list[tuple[tuple[str, ...], EntityCategory]]] = {}
        self.max_term_words = 1
        self.terms = terms
        self.value_patterns = value_patterns
        for category, term_list in terms.items():
            for term in term_list:
                words = tuple(term.lower().split())
                if not words or any(not w for w in words):
                    raise ValueError(f"invalid lexicon term {term!r}")
                self.max_term_words = max(self.max_term_words, len(words))
                self._by_prefix.setdefault(words[0], []).append((words, category))
        # longest-first per prefix so the first hit at a position wins
        for entries in self._by_prefix.values():
            entries.sort(key=lambda e: (-len(e[0]), _CATEGORY_RANK[e[1]]))

    @classmethod
    def from_dict(cls, data: dict) -> "Lexicon":
        terms: dict[EntityCategory, list[str]] = {}
        for key, category in _LEXICON_KEYS.items():
            entries = data.get(key, [])
            if not isinstance(entries, list):
                raise ValueError(f"lexicon field {key!r} must be a list")
            terms[category] = [str(t) for t in entries]
        patterns = []
        for raw in data.get("value_patterns", []):
            patterns.append(
                ValuePattern(
                    name=raw["name"],
                    pattern=re.compile(raw["pattern"], re.IGNORECASE),
                    unit=raw["unit"],
                )
            )
        return cls(terms, patterns)

    @classmethod
    def from_file(cls, path: str | Path) -> "Lexicon":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


_default_lexicon: Lexicon | None = None


def default_lexicon() -> Lexicon:
    global _default_lexicon
    if _default_lexicon is None:
        data = resources.files("clearbench").joinpath("data/lexicon.json")
        _default_lexicon = Lexicon.from_dict(json.loads(data.read_text(encoding="utf-8")))
    return _default_lexicon


def score_confidence(match_kind: MatchKind, term_length_words: int) -> float:
    """Fixed confidence per match kind; values only need a stable ordering."""
    if term_length_words < 1:
        raise ValueError("term_length_words must be >= 1")
    if match_kind == MatchKind.EXACT_MULTI_WORD:
        score = 0.95
    elif match_kind == MatchKind.EXACT_SINGLE_WORD:
        score = 0.85
    elif match_kind == MatchKind.VALUE_PATTERN:
        score = 0.90
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown match kind {match_kind!r}")
    return min(max(score, 1e-9), 1.0)


def extract_values(text: str, lexicon: Lexicon | None = None) -> list[ClinicalEntity]:
    """Vital-sign and laboratory value matches as LabValue entities."""
    if lexicon is None:
        lexicon = default_lexicon()
    if not text.strip():
        return []
    spans = word_spans(text)
    found: list[ClinicalEntity] = []
    for vp in lexicon.value_patterns:
        for m in vp.pattern.finditer(text):
            try:
                value = float(m.group("value").replace(",", ""))
            except (IndexError, ValueError):
                value = None
            start_word, end_word = char_span_to_word_span(spans, m.start(), m.end())
            found.append(
                ClinicalEntity(
                    surface=m.group(0),
                    category=EntityCategory.LAB_VALUE,
                    start_word=start_word,
                    end_word=end_word,
                    confidence=score_confidence(
                        MatchKind.VALUE_PATTERN, max(1, end_word - start_word)
                    ),
                    numeric_value=value,
                    unit=vp.unit,
                )
            )
    found.sort(key=lambda e: (e.start_word, e.end_word))
    return found


def _lexicon_candidates(words: list[str], lexicon: Lexicon) -> list[ClinicalEntity]:
    canon = [canonical_word(w) for w in words]
    out: list[ClinicalEntity] = []
    n = len(words)
    for i, first in enumerate(canon):
        entries = lexicon._by_prefix.get(first)
        if not entries:
            continue
        for term_words, category in entries:
            length = len(term_words)
            if i + length > n:
                continue
            if tuple(canon[i : i + length]) == term_words:
                kind = (
                    MatchKind.EXACT_MULTI_WORD
                    if length > 1
                    else MatchKind.EXACT_SINGLE_WORD
                )
                out.append(
                    ClinicalEntity(
                        surface=" ".join(words[i : i + length]),
                        category=category,
                        start_word=i,
                        end_word=i + length,
                        confidence=score_confidence(kind, length),
                    )
                )
                break  # longest match at this position
    return out


def extract_entities(text: str, lexicon: Lexicon | None = None) -> list[ClinicalEntity]:
    """Union of lexicon and value-pattern matches with overlaps resolved.

    Longest match wins; ties prefer the earlier start, then value patterns,
    then category order. Output is sorted by start_word.
    """
    if lexicon is None:
        lexicon = default_lexicon()
    if not text.strip():
        return []
    words = split_words(text)
    candidates: list[tuple[tuple, ClinicalEntity]] = []
    for ent in extract_values(text, lexicon):
        key = (-(ent.end_word - ent.start_word), ent.start_word, 0, 0)
        candidates.append((key, ent))
    for ent in _lexicon_candidates(words, lexicon):
        key = (
            -(ent.end_word - ent.start_word),
            ent.start_word,
            1,
            _CATEGORY_RANK[ent.category],
        )
        candidates.append((key, ent))
    candidates.sort(key=lambda pair: pair[0])

    occupied = [False] * len(words)
    selected: list[ClinicalEntity] = []
    for _, ent in candidates:
        if any(occupied[ent.start_word : ent.end_word]):
            continue
        for w in range(ent.start_word, ent.end_word):
            occupied[w] = True
        selected.append(ent)
    selected.sort(key=lambda e: (e.start_word, e.end_word))
    return selected
