"""Build the default synthetic corpus and look inside one note.

Twelve seeded notes across three size strata, each planted with the facts
that back the two study questions. Everything is deterministic: the same
seed always yields byte-identical notes.
"""

from clearbench import build_default_corpus, save_corpus

corpus = build_default_corpus(seed=42)

print(f"notes: {len(corpus.notes)}, questions: {len(corpus.questions)}")
for note in corpus.notes:
    print(f"  {note.id:16s} {note.token_size:7,} tokens  {note.size_class.value}")

note = corpus.notes[0]
print("\nfirst 400 characters of", note.id)
print(note.text[:400])

print("\nplanted fact positions (fraction of the document):")
for fact in note.meta["facts"]:
    print(f"  {fact['block_id']:32s} at {fact['word_fraction']:.2f} in {fact['section']}")

for question in corpus.questions:
    print(f"\n{question.id}: {question.text}")

save_corpus(corpus, "corpus.json")
print("\nwrote corpus.json")
