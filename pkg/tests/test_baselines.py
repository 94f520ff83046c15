from __future__ import annotations

import random

import numpy as np
import pytest

from clearbench.baselines import build_wide_context, chunk_note, rank_chunks, retrieve_rag
from clearbench.corpus import ClinicalNote, Question, count_tokens
from clearbench.metrics import cosine
from clearbench.retrieval import Strategy


def note_from_words(words: list[str], note_id: str = "toy") -> ClinicalNote:
    return ClinicalNote.from_text(note_id, "ASSESSMENT:\n" + " ".join(words))


def brute_force_top_k(note, question, embedder, k, chunk_size, overlap):
    """Independent ranking: cosine of every chunk, stable sort."""
    chunks = chunk_note(note, chunk_size, overlap)
    qv = embedder.embed(question.text)
    sims = [(cosine(qv, embedder.embed(c.text)), c.start_word, i) for i, c in enumerate(chunks)]
    sims.sort(key=lambda t: (-t[0], t[1]))
    return [i for _, _, i in sims[:k]]


class TestWideContext:
    def test_tokens_equal_note_size(self, default_corpus):
        note = default_corpus.notes[0]
        pkg = build_wide_context(note)
        assert pkg.strategy == Strategy.WIDE
        assert pkg.context_tokens == note.token_size

    def test_single_segment_byte_equal(self, default_corpus):
        note = default_corpus.notes[0]
        pkg = build_wide_context(note)
        assert len(pkg.segments) == 1
        assert pkg.segments[0].text == note.text

    def test_empty_note(self):
        note = ClinicalNote(id="e", text="", token_size=0, size_class=count_and_class(""))
        pkg = build_wide_context(note)
        assert pkg.segments == [] and pkg.context_tokens == 0


def count_and_class(text):
    from clearbench.corpus import classify_size

    return classify_size(count_tokens(text))


class TestChunkNote:
    def test_stride_offsets_example(self):
        note = note_from_words([f"w{i}" for i in range(10)])
        # heading adds one word; build a bare note instead
        note = ClinicalNote.from_text("t", " ".join(f"w{i}" for i in range(10)))
        chunks = chunk_note(note, chunk_size_words=4, overlap_words=1)
        assert [c.start_word for c in chunks] == [0, 3, 6, 9]
        assert chunks[-1].end_word == 10

    def test_oversize_chunk_is_whole_note(self):
        note = ClinicalNote.from_text("t", " ".join(f"w{i}" for i in range(10)))
        chunks = chunk_note(note, chunk_size_words=200, overlap_words=40)
        assert len(chunks) == 1
        assert (chunks[0].start_word, chunks[0].end_word) == (0, 10)
        assert chunks[0].text == note.text

    def test_invalid_params(self):
        note = ClinicalNote.from_text("t", "a b c")
        with pytest.raises(ValueError):
            chunk_note(note, chunk_size_words=0, overlap_words=0)
        with pytest.raises(ValueError):
            chunk_note(note, chunk_size_words=5, overlap_words=5)
        with pytest.raises(ValueError):
            chunk_note(note, chunk_size_words=5, overlap_words=-1)

    def test_full_coverage_brute_force(self):
        rng = random.Random(3)
        for _ in range(25):
            n = rng.randint(1, 120)
            size = rng.randint(1, 30)
            overlap = rng.randint(0, size - 1)
            note = ClinicalNote.from_text("t", " ".join(f"w{i}" for i in range(n)))
            chunks = chunk_note(note, size, overlap)
            covered = [False] * n
            for c in chunks:
                assert c.end_word - c.start_word <= size
                for i in range(c.start_word, c.end_word):
                    covered[i] = True
            assert all(covered)


class TestRetrieveRag:
    def test_question_chunk_ranks_first(self, embedder):
        rng = random.Random(5)
        filler = ["rounds", "coordination", "paperwork", "timeline", "update"]
        words = [rng.choice(filler) for _ in range(240)]
        question = Question(id="q", text="anemia detected earlier history", gold_answer="g")
        words[120:120] = question.text.split()
        note = ClinicalNote.from_text("t", " ".join(words))
        chunks = chunk_note(note, 40, 10)
        ranked = rank_chunks(question, chunks, embedder)
        best_chunk = chunks[ranked[0][1]]
        assert "anemia" in best_chunk.text

    def test_k_one_single_chunk_note(self, embedder):
        note = ClinicalNote.from_text("t", "anemia was detected in clinic")
        question = Question(id="q", text="anemia?", gold_answer="g")
        pkg = retrieve_rag(note, question, embedder, k=1)
        assert len(pkg.segments) == 1
        assert pkg.segments[0].text == note.text

    def test_k_larger_than_chunk_count(self, embedder):
        note = ClinicalNote.from_text("t", " ".join(f"w{i}" for i in range(30)))
        question = Question(id="q", text="w1 w2", gold_answer="g")
        pkg = retrieve_rag(note, question, embedder, k=50, chunk_size_words=10, overlap_words=0)
        assert pkg.context_tokens == note.token_size

    def test_matches_brute_force_oracle(self, embedder):
        rng = random.Random(11)
        vocab = [
            "anemia", "fatigue", "hemoglobin", "rounds", "team", "update",
            "plan", "stable", "noted", "review", "follow", "clinic",
        ]
        for trial in range(30):
            n = rng.randint(30, 400)
            words = [rng.choice(vocab) for _ in range(n)]
            note = ClinicalNote.from_text(f"t{trial}", " ".join(words))
            question = Question(
                id="q", text=" ".join(rng.sample(vocab, 3)), gold_answer="g"
            )
            size = rng.randint(10, 60)
            overlap = rng.randint(0, min(size - 1, 20))
            k = rng.randint(1, 4)
            pkg = retrieve_rag(note, question, embedder, k, size, overlap)
            expected = brute_force_top_k(note, question, embedder, k, size, overlap)
            chunks = chunk_note(note, size, overlap)
            got = {
                (c["start_word"], c["end_word"]) for c in pkg.provenance["selected_chunks"]
            }
            want = {(chunks[i].start_word, chunks[i].end_word) for i in expected}
            assert got == want

    def test_segments_sorted_non_overlapping(self, embedder, default_corpus):
        note = default_corpus.notes[0]
        q = default_corpus.questions[0]
        pkg = retrieve_rag(note, q, embedder)
        pkg.validate()
        assert pkg.strategy == Strategy.RAG

    def test_context_magnitude_on_default_corpus(self, embedder, default_corpus):
        # with default knobs the context should stay in the few-hundred-token
        # range regardless of note size
        for note in (default_corpus.notes[0], default_corpus.notes[-1]):
            q = default_corpus.questions[0]
            pkg = retrieve_rag(note, q, embedder)
            assert 100 <= pkg.context_tokens <= 2_000

    def test_token_upper_bound_property(self, embedder, default_corpus):
        note = default_corpus.notes[0]
        q = default_corpus.questions[1]
        k, size = 2, 200
        pkg = retrieve_rag(note, q, embedder, k=k, chunk_size_words=size)
        words = note.text.split()
        max_tokens_per_word = max(count_tokens(w) for w in words)
        assert pkg.context_tokens <= k * size * max_tokens_per_word

    def test_deterministic(self, embedder, default_corpus):
        note = default_corpus.notes[2]
        q = default_corpus.questions[0]
        a = retrieve_rag(note, q, embedder)
        b = retrieve_rag(note, q, embedder)
        assert a == b

    def test_invalid_k(self, embedder):
        note = ClinicalNote.from_text("t", "a b c")
        with pytest.raises(ValueError):
            retrieve_rag(note, Question(id="q", text="x", gold_answer="g"), embedder, k=0)
