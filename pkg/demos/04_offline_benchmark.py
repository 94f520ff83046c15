"""Run the full strategy matrix offline with the deterministic mock model.

72 cells (12 notes x 2 questions x 3 strategies), scored against the gold
answers with the hashing embedder and exact-match METEOR. The mock answerer
is extractive, so retrieval quality drives answer quality.
"""

from clearbench import build_default_corpus, win_table
from clearbench.runconfig import RunConfig
from clearbench.runner import eval_results, run_matrix, save_records

corpus = build_default_corpus(seed=42)
config = RunConfig(corpus_path="<in-memory>")

records = run_matrix(config, corpus=corpus)
save_records(records, "results.jsonl")
print(f"ran {len(records)} cells; wrote results.jsonl")

table = win_table(eval_results(records))
print(f"\ncases: {table.cases}")
for strategy, stats in table.stats.items():
    savings = (
        f"{100 * stats.token_savings_vs_wide:5.1f}%"
        if stats.token_savings_vs_wide is not None
        else "  n/a"
    )
    print(
        f"  {strategy.display:6s} wins {stats.wins:2d}/{table.cases}  "
        f"mean sim {stats.mean_similarity:.3f}  "
        f"mean tokens {stats.mean_tokens:9,.0f}  savings vs wide {savings}"
    )

sample = next(r for r in records if r.strategy.value == "clear")
print(f"\nsample answer ({sample.note_id}, {sample.question_id}):")
print(" ", sample.answer[:300])
