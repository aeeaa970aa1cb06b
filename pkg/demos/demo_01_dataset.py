"""
Building a ZIP-level dataset
============================

Raw rooftop counts only describe the part of each ZIP that was surveyed,
so they are scaled up before joining with the census table.
"""

from sitegrid import scale_by_coverage, synth_tables, clean_join, aggregate_states

# half of a ZIP surveyed: counts double
print(scale_by_coverage(50, 200, 50))

###############################################################################
# The synthetic generator hands back raw tables shaped like real inputs.

tables = synth_tables(seed=1, n_zips=300)
print(len(tables.sunroof), "sunroof rows,", len(tables.acs), "census rows")

ds = clean_join(tables.sunroof, tables.acs)
prov = ds.provenance
print("kept", prov["retained"], "of", prov["intersection"], "joined ZIPs; dropped", prov["dropped"])

###############################################################################
# State rows are plain means over member ZIPs, plus the overlays.

ds = aggregate_states(ds, tables.voting, tables.energy_mix)
for s in ds.states[:3]:
    print(s.state_code, s.zip_count, round(s.means["median_income"]), s.republican_vote_share)

z = ds.zips[0]
print(z.zip_code, "energy/panel %.0f kWh, carbon/panel %.0f kg" % (z.energy_per_panel, z.carbon_per_panel))
