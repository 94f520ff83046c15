"""Run the three retrieval strategies on one note and compare their shapes.

Wide passes the whole note through; chunk retrieval embeds sliding windows
and keeps the top k; entity-window retrieval centers fixed-radius windows
on extracted entities, scores them against the question, and packs the
merged spans under a hard token budget.
"""

from clearbench import (
    HashingEmbedder,
    build_default_corpus,
    build_wide_context,
    retrieve_clear,
    retrieve_rag,
)

corpus = build_default_corpus(seed=42)
note = corpus.notes[8]  # a large note
question = corpus.questions[0]
embedder = HashingEmbedder()

wide = build_wide_context(note)
rag = retrieve_rag(note, question, embedder)
clear = retrieve_clear(note, question, embedder=embedder)

print(f"note {note.id}: {note.token_size:,} tokens")
print(f"question: {question.text}\n")
for pkg in (wide, rag, clear):
    print(
        f"{pkg.strategy.display:6s} -> {len(pkg.segments):3d} segments, "
        f"{pkg.context_tokens:6,} context tokens"
    )

print("\nentity-window provenance:")
prov = clear.provenance
print(
    f"  {prov['n_entities']} entities -> {prov['n_windows']} windows -> "
    f"{prov['n_merged_spans']} merged spans -> {len(clear.segments)} selected"
)
print("  top selected spans by score:")
for span in sorted(prov["selected_spans"], key=lambda s: -s["score"])[:5]:
    print(
        f"    words [{span['start_word']:6d},{span['end_word']:6d}) "
        f"score {span['score']:.3f} anchors {span['anchor_count']}"
    )

print("\nbudget safety: context stays bounded regardless of note size")
for candidate in (corpus.notes[0], corpus.notes[4], corpus.notes[11]):
    pkg = retrieve_clear(candidate, question, embedder=embedder)
    print(f"  {candidate.id:16s} {candidate.token_size:7,} -> {pkg.context_tokens:5,} tokens")
