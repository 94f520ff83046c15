"""Sweep an efficiency bonus over the replayed results.

The adjusted score blends answer quality with token savings:
(1 - bonus) * similarity + bonus * savings. The pairwise difference is
linear in the bonus, so each strategy pair flips order at most once.
"""

from clearbench import sweep
from clearbench.analysis import sweep_csv
from clearbench.runner import default_fixture_path, load_fixture

fixture = load_fixture(default_fixture_path())
grid = [round(0.01 * i, 2) for i in range(21)]
result = sweep(fixture.results, grid)

print("bonus  " + "  ".join(f"{s.display:>7s}" for s in result.strategies) + "   winner")
for i, bonus in enumerate(grid):
    row = "  ".join(f"{result.mean_adjusted[s][i]:7.4f}" for s in result.strategies)
    print(f"{bonus:5.2f}  {row}   {result.winners[i].display}")

print("\nordering flips relative to bonus = 0:")
if result.crossovers:
    for cross in result.crossovers:
        a, b = cross["pair"]
        print(f"  {a} vs {b} at bonus {cross['bonus']:.2f}")
else:
    print("  none on this grid")

with open("sweep.csv", "w") as fh:
    fh.write(sweep_csv(result))
print("\nwrote sweep.csv")
