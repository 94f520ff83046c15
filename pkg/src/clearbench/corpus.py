"""Corpus data model, tokenization, size classification and persistence.

The token counter defined here is the single token authority for the whole
platform: budgets, savings and reported token columns all use it.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from clearbench.text import is_heading

_TOKEN_RE = re.compile(r"[0-9A-Za-z]+|[^\s0-9A-Za-z]")

SMALL_MAX_TOKENS = 20_000
MEDIUM_MAX_TOKENS = 55_000

SCHEMA_VERSION = 1


class SizeClass(str, Enum):
    SMALL = "Small"
    MEDIUM = "Medium"
    LARGE = "Large"


class CorpusError(ValueError):
    """Raised for malformed or inconsistent corpus data.

    ``field`` names the offending location, e.g. ``notes[3].id``.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class CorpusWarning(UserWarning):
    pass


def count_tokens(text: str) -> int:
    """Count maximal alphanumeric runs plus standalone punctuation marks.

    Whitespace is never counted. "BP 120/80 stable." has six tokens:
    BP, 120, /, 80, stable and the final period. Deterministic, and additive
    over concatenation with a separating space.
    """
    return sum(1 for _ in _TOKEN_RE.finditer(text))


def classify_size(token_count: int) -> SizeClass:
    """Bucket a token count into Small (<20K), Medium (20K-55K) or Large."""
    if token_count < 0:
        raise ValueError("token_count must be nonnegative")
    if token_count < SMALL_MAX_TOKENS:
        return SizeClass.SMALL
    if token_count <= MEDIUM_MAX_TOKENS:
        return SizeClass.MEDIUM
    return SizeClass.LARGE


@dataclass
class ClinicalNote:
    """One clinical document with its recomputed token size.

    ``meta`` carries generator bookkeeping (planted headings, fact positions)
    and round-trips through persistence untouched.
    """

    id: str
    text: str
    token_size: int
    size_class: SizeClass
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_text(cls, note_id: str, text: str, meta: dict | None = None) -> "ClinicalNote":
        tokens = count_tokens(text)
        return cls(
            id=note_id,
            text=text,
            token_size=tokens,
            size_class=classify_size(tokens),
            meta=meta or {},
        )


@dataclass
class Question:
    id: str
    text: str
    gold_answer: str


@dataclass
class Corpus:
    notes: list[ClinicalNote]
    questions: list[Question]
    metadata: dict = field(default_factory=dict)

    def note(self, note_id: str) -> ClinicalNote:
        for n in self.notes:
            if n.id == note_id:
                return n
        raise KeyError(note_id)

    def question(self, question_id: str) -> Question:
        for q in self.questions:
            if q.id == question_id:
                return q
        raise KeyError(question_id)

    def validate(self) -> None:
        if not self.notes:
            raise CorpusError("corpus has no notes", field="notes")
        if not self.questions:
            raise CorpusError("corpus has no questions", field="questions")
        seen: set[str] = set()
        for i, note in enumerate(self.notes):
            loc = f"notes[{i}]"
            if not note.id:
                raise CorpusError("empty id", field=f"{loc}.id")
            if note.id in seen:
                raise CorpusError(f"duplicate id {note.id!r}", field=f"{loc}.id")
            seen.add(note.id)
            if note.token_size != count_tokens(note.text):
                raise CorpusError(
                    "token_size does not match recount", field=f"{loc}.token_size"
                )
            if note.size_class != classify_size(note.token_size):
                raise CorpusError(
                    "size_class does not match token_size", field=f"{loc}.size_class"
                )
            if note.text and not any(is_heading(l) for l in note.text.splitlines()):
                raise CorpusError(
                    "note contains no recognizable section heading",
                    field=f"{loc}.text",
                )
        qseen: set[str] = set()
        for i, q in enumerate(self.questions):
            loc = f"questions[{i}]"
            if not q.id:
                raise CorpusError("empty id", field=f"{loc}.id")
            if q.id in qseen:
                raise CorpusError(f"duplicate id {q.id!r}", field=f"{loc}.id")
            qseen.add(q.id)
            if not q.gold_answer:
                raise CorpusError("gold_answer must be non-empty", field=f"{loc}.gold_answer")


def _normalize_newlines(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as schema-versioned UTF-8 JSON."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "metadata": corpus.metadata,
        "notes": [
            {
                "id": n.id,
                "text": n.text,
                "token_size": n.token_size,
                "size_class": n.size_class.value,
                "meta": n.meta,
            }
            for n in corpus.notes
        ],
        "questions": [
            {"id": q.id, "text": q.text, "gold_answer": q.gold_answer}
            for q in corpus.questions
        ],
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )


def _require(obj: dict, key: str, kind: type, loc: str):
    if key not in obj:
        raise CorpusError("missing required field", field=f"{loc}.{key}")
    value = obj[key]
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise CorpusError(
            f"expected {kind.__name__}, got {type(value).__name__}",
            field=f"{loc}.{key}",
        )
    return value


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus file.

    Declared token sizes are never trusted: they are recomputed from the text
    and silently corrected (with a warning) when they disagree.
    """
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"not valid JSON: {exc}", field="$") from exc
    if not isinstance(payload, dict):
        raise CorpusError("top-level value must be an object", field="$")
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise CorpusError(
            f"unsupported schema_version {version!r}", field="schema_version"
        )
    raw_notes = _require(payload, "notes", list, "$")
    raw_questions = _require(payload, "questions", list, "$")
    metadata = payload.get("metadata", {})
    if not isinstance(metadata, dict):
        raise CorpusError("metadata must be an object", field="metadata")

    notes: list[ClinicalNote] = []
    for i, raw in enumerate(raw_notes):
        loc = f"notes[{i}]"
        if not isinstance(raw, dict):
            raise CorpusError("note must be an object", field=loc)
        note_id = _require(raw, "id", str, loc)
        text = _normalize_newlines(_require(raw, "text", str, loc))
        declared = _require(raw, "token_size", int, loc)
        meta = raw.get("meta", {})
        if not isinstance(meta, dict):
            raise CorpusError("meta must be an object", field=f"{loc}.meta")
        actual = count_tokens(text)
        if declared != actual:
            warnings.warn(
                f"note {note_id!r}: declared token_size {declared} != recount "
                f"{actual}; corrected",
                CorpusWarning,
                stacklevel=2,
            )
        notes.append(
            ClinicalNote(
                id=note_id,
                text=text,
                token_size=actual,
                size_class=classify_size(actual),
                meta=meta,
            )
        )

    questions: list[Question] = []
    for i, raw in enumerate(raw_questions):
        loc = f"questions[{i}]"
        if not isinstance(raw, dict):
            raise CorpusError("question must be an object", field=loc)
        questions.append(
            Question(
                id=_require(raw, "id", str, loc),
                text=_require(raw, "text", str, loc),
                gold_answer=_require(raw, "gold_answer", str, loc),
            )
        )

    corpus = Corpus(notes=notes, questions=questions, metadata=metadata)
    corpus.validate()
    return corpus
