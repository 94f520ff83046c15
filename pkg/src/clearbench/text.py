"""Shared word-level text utilities.

Word indices are the common coordinate system across the platform: section
spans, entity spans, retrieval windows and chunks all address the same
whitespace-delimited word sequence produced by :func:`split_words`.
"""

from __future__ import annotations

import re

_WORD_RE = re.compile(r"\S+")
_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")
_CONTENT_RE = re.compile(r"[a-z0-9]+")

# A heading is a line of at least three uppercase letters, spaces or slashes,
# optionally ending in ":". At least one letter is required so stray
# punctuation lines never become sections.
_HEADING_RE = re.compile(r"[A-Z/ ]{3,}:?")


def is_heading(line: str) -> bool:
    stripped = line.strip()
    return bool(_HEADING_RE.fullmatch(stripped)) and any(
        c.isalpha() for c in stripped
    )


def canonical_heading(line: str) -> str:
    """Canonical section name: uppercased, trailing ':' stripped, internal
    whitespace collapsed."""
    name = line.strip().upper()
    if name.endswith(":"):
        name = name[:-1]
    return " ".join(name.split())

# Minimal English function-word list. Used both by the hashing embedder and
# by the extractive mock answerer when ranking sentences.
STOPWORDS = frozenset(
    """
    a an the and or but nor if then than that this these those there here
    is are was were be been being am do does did done doing have has had
    having will would shall should can could may might must ought
    of in on at by for with without to from into onto over under
    up down out off again further once only own same so too very not no
    as until while about against between through during before after
    above below it its itself he him his himself she her hers herself
    they them their theirs themselves what which who whom whose
    i me my mine myself we us our ours ourselves you your yours yourself
    all any both each few more most other some such per via also
    s t d ll re ve
    """.split()
)


def split_words(text: str) -> list[str]:
    """Whitespace-delimited words, the platform's word-index space."""
    return text.split()


def word_spans(text: str) -> list[tuple[int, int]]:
    """Character (start, end) offsets of each word in ``split_words`` order."""
    return [m.span() for m in _WORD_RE.finditer(text)]


_STRIP_CHARS = "".join(
    chr(c) for c in range(33, 127) if not chr(c).isalnum()
)


def canonical_word(word: str) -> str:
    """Lowercase a word and strip non-alphanumeric characters at both ends.

    Internal punctuation (hyphens, slashes) survives so terms like
    "follow-up" or values like "120/80" keep their shape.
    """
    return word.strip(_STRIP_CHARS).lower()


def split_sentences(text: str) -> list[str]:
    """Split on sentence-ending punctuation followed by whitespace."""
    parts = [p.strip() for p in _SENTENCE_RE.split(text)]
    return [p for p in parts if p]


def content_words(text: str) -> list[str]:
    """Lowercased alphanumeric runs with stopwords removed."""
    return [w for w in _CONTENT_RE.findall(text.lower()) if w not in STOPWORDS]


def char_span_to_word_span(
    spans: list[tuple[int, int]], start: int, end: int
) -> tuple[int, int]:
    """Map a character interval onto the smallest covering word interval.

    ``spans`` must come from :func:`word_spans` for the same text. Returns a
    half-open word-index interval.
    """
    first = None
    last = None
    for i, (ws, we) in enumerate(spans):
        if we > start and ws < end:
            if first is None:
                first = i
            last = i
    if first is None:
        raise ValueError(f"character span [{start}, {end}) covers no word")
    return first, last + 1
