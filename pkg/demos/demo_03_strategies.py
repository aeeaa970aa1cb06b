"""
Siting strategies on a toy map
==============================

Three ZIPs, ten free roofs between them.
"""

from sitegrid import Dataset, ZipRecord, DEFAULT_ROSTER, plan_impacts


def zip_(code, existing, potential, energy, carbon, black, income):
    return ZipRecord(code, "AA", existing, potential, energy * potential, carbon * potential, 100.0,
                     race_share_black=black, median_income=income)


ds = Dataset((
    zip_("00001", 1, 4, 500, 10, 0.1, 90e3),
    zip_("00002", 2, 4, 300, 20, 0.5, 40e3),
    zip_("00003", 1, 6, 400, 15, 0.3, 60e3),
))

for s in DEFAULT_ROSTER:
    plan = s.allocate(ds, 4)
    energy, carbon = plan_impacts(ds, plan)
    print(f"{s.name:17s} {dict(plan.placements)!s:36s} {energy:6.0f} kWh {carbon:4.0f} kg")

###############################################################################
# A weighted policy mixes normalized attributes; low income scores high here.

from sitegrid import Strategy

mix = Strategy("mix", "weighted", weights={"carbon_per_panel": 1, "median_income": 1}, ascending=("median_income",))
print(mix.allocate(ds, 4).placements)
