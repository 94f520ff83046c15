"""Wide-context passthrough and chunk-embedding retrieval baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from clearbench.corpus import ClinicalNote, Question
from clearbench.metrics import cosine
from clearbench.retrieval import ContextPackage, Segment, Strategy, make_package
from clearbench.text import split_words

DEFAULT_CHUNK_SIZE_WORDS = 200
DEFAULT_OVERLAP_WORDS = 40
DEFAULT_TOP_K = 2


@dataclass
class Chunk:
    start_word: int
    end_word: int
    text: str
    embedding: np.ndarray | None = None


def build_wide_context(note: ClinicalNote) -> ContextPackage:
    """The whole note as a single segment; tokens equal the note size."""
    words = split_words(note.text)
    segments = (
        [Segment(text=note.text, start_word=0, end_word=len(words), score=1.0)]
        if words
        else []
    )
    return make_package(Strategy.WIDE, segments, provenance={"note_id": note.id})


def chunk_note(
    note: ClinicalNote,
    chunk_size_words: int = DEFAULT_CHUNK_SIZE_WORDS,
    overlap_words: int = DEFAULT_OVERLAP_WORDS,
) -> list[Chunk]:
    """Sliding word windows with stride chunk_size - overlap.

    The last chunk may be short; every word is covered by at least one chunk.
    """
    if chunk_size_words < 1:
        raise ValueError("chunk_size_words must be positive")
    if not 0 <= overlap_words < chunk_size_words:
        raise ValueError("need 0 <= overlap_words < chunk_size_words")
    words = split_words(note.text)
    stride = chunk_size_words - overlap_words
    chunks = []
    for start in range(0, len(words), stride):
        end = min(start + chunk_size_words, len(words))
        chunks.append(
            Chunk(start_word=start, end_word=end, text=" ".join(words[start:end]))
        )
    return chunks


def rank_chunks(question: Question, chunks: list[Chunk], embedder) -> list[tuple[float, int]]:
    """(similarity, chunk index) pairs sorted best-first, ties by position."""
    question_vec = embedder.embed(question.text)
    scored = []
    for i, chunk in enumerate(chunks):
        if chunk.embedding is None:
            chunk.embedding = embedder.embed(chunk.text)
        scored.append((cosine(question_vec, chunk.embedding), i))
    scored.sort(key=lambda pair: (-pair[0], chunks[pair[1]].start_word))
    return scored


def retrieve_rag(
    note: ClinicalNote,
    question: Question,
    embedder,
    k: int = DEFAULT_TOP_K,
    chunk_size_words: int = DEFAULT_CHUNK_SIZE_WORDS,
    overlap_words: int = DEFAULT_OVERLAP_WORDS,
) -> ContextPackage:
    """Top-k chunks by cosine similarity to the question.

    Overlapping selections are merged into position-ordered, non-overlapping
    segments; a merged segment keeps the best member similarity as its score.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    words = split_words(note.text)
    if not words:
        return make_package(Strategy.RAG, [], provenance={"note_id": note.id})
    chunks = chunk_note(note, chunk_size_words, overlap_words)
    ranked = rank_chunks(question, chunks, embedder)
    selected = sorted(ranked[:k], key=lambda pair: chunks[pair[1]].start_word)

    segments: list[Segment] = []
    for sim, idx in selected:
        chunk = chunks[idx]
        if segments and chunk.start_word <= segments[-1].end_word:
            prev = segments[-1]
            end = max(prev.end_word, chunk.end_word)
            segments[-1] = Segment(
                text=" ".join(words[prev.start_word : end]),
                start_word=prev.start_word,
                end_word=end,
                score=max(prev.score, sim),
            )
        else:
            segments.append(
                Segment(
                    text=chunk.text,
                    start_word=chunk.start_word,
                    end_word=chunk.end_word,
                    score=sim,
                )
            )
    provenance = {
        "note_id": note.id,
        "k": k,
        "chunk_size_words": chunk_size_words,
        "overlap_words": overlap_words,
        "n_chunks": len(chunks),
        "selected_chunks": [
            {
                "start_word": chunks[i].start_word,
                "end_word": chunks[i].end_word,
                "similarity": round(sim, 6),
            }
            for sim, i in selected
        ],
    }
    return make_package(Strategy.RAG, segments, provenance=provenance)
