"""Replay the published per-note benchmark figures through the metrics stack.

The shipped fixture carries the released similarity and token values, so
win rates, buckets and savings can be validated without any model. Its
remarks record the internal inconsistencies of the source tables.
"""

from clearbench import bucket_analysis, render_report, win_table
from clearbench.analysis import build_report_tables
from clearbench.runner import default_fixture_path, load_fixture

fixture = load_fixture(default_fixture_path())
print(f"replayed {len(fixture.results)} published rows from {default_fixture_path().name}")

table = win_table(fixture.results)
for strategy, stats in table.stats.items():
    print(
        f"  {strategy.display:6s} wins {stats.wins:2d}/{table.cases} "
        f"({100 * stats.win_rate:.1f}%)  mean sim {stats.mean_similarity:.3f}  "
        f"mean tokens {stats.mean_tokens:9,.1f}"
    )

print("\nwins by note size class (entity-window strategy):")
for size_class, bucket in bucket_analysis(fixture.results, fixture.note_sizes).items():
    from clearbench import Strategy

    stats = bucket.stats[Strategy.CLEAR]
    print(f"  {size_class.value:6s} {stats.wins}/{bucket.cases}")

tables = build_report_tables(fixture.results, fixture.note_sizes, fixture.remarks)
report = render_report(tables)
with open("report.md", "w") as fh:
    fh.write(report)
print("\nwrote report.md; remarks recorded in it:")
for remark in fixture.remarks:
    print(f"  - {remark[:100]}...")
