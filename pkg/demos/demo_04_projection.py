"""
Budgets, curves and who benefits
================================
"""

from sitegrid import (
    synth_dataset, run_projection, ProjectionConfig, percent_of, crossover_report,
    equity_report, SplitSpec, DEFAULT_ROSTER,
)

ds = synth_dataset(seed=3, n_zips=3000)
grid = tuple(range(0, 1_800_001, 200_000))
curves = {c.strategy: c for c in run_projection(ds, ProjectionConfig(grid), workers=4)}
base = curves["status_quo"]
print("scenario markers:", [round(m) for m in base.markers])

for name, c in curves.items():
    print(f"{name:17s} energy {percent_of(c, base, 'energy', grid[-1]):6.1f}%"
          f"  carbon {percent_of(c, base, 'carbon', grid[-1]):6.1f}%")

###############################################################################
# Budget needed to match the status quo's carbon at the last marker.

for row in crossover_report(list(curves.values()), "status_quo"):
    print(row["strategy"], row["crossover_budget"], row["beyond_grid"])

###############################################################################
# State-level realized potential before and after round robin.

specs = [SplitSpec("race_share_black", "above", "state"), SplitSpec("median_income", "below", "state")]
rr = dict((s.name, s) for s in DEFAULT_ROSTER)["round_robin"]
pre = equity_report(ds, specs)
post = equity_report(ds, specs, rr.allocate(ds, grid[-1]))
for a, b in zip(pre.entries, post.entries):
    print(f"{a.spec.label:28s} {a.realized_pct_diff:+6.1f}% -> {b.realized_pct_diff:+6.1f}%")
