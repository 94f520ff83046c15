"""Parse a clinical note into weighted sections and extract its entities.

Sections tile the note's word space with priority weights (ASSESSMENT and
PLAN at 1.0). Entity extraction combines lexicon lookups with value
patterns for vitals and labs.
"""

from collections import Counter

from clearbench import build_default_corpus, extract_entities, extract_values, parse_sections

corpus = build_default_corpus(seed=42)
note = corpus.notes[0]

sections = parse_sections(note.text)
print("sections (name, words, weight):")
for section in sections:
    width = section.end_word - section.start_word
    print(f"  {section.name:28s} {width:6d} words  weight {section.weight}")

entities = extract_entities(note.text)
print(f"\n{len(entities)} entities; by category:")
for category, count in Counter(e.category.value for e in entities).items():
    print(f"  {category:12s} {count}")

print("\nfirst ten entities:")
for entity in entities[:10]:
    extra = ""
    if entity.numeric_value is not None:
        extra = f" = {entity.numeric_value} {entity.unit}"
    print(
        f"  [{entity.start_word:6d},{entity.end_word:6d}) "
        f"{entity.category.value:10s} {entity.surface!r}{extra} "
        f"(confidence {entity.confidence})"
    )

print("\nvalue patterns on a snippet:")
for value in extract_values("BP 142/88, HR 96, hemoglobin 8.9 g/dL, BNP 1240"):
    print(f"  {value.surface!r} -> {value.numeric_value} {value.unit}")
