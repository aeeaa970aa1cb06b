"""
Per-panel efficiency and where panels already are
=================================================
"""

from sitegrid import synth_dataset, per_panel_table, summary_statistics, quadrant_stats, quantile_fits, pearson

ds = synth_dataset(seed=2, n_zips=2000)
table, excluded = per_panel_table(ds)
print(len(table), "ZIPs with viable roofs,", excluded, "without")

stats = summary_statistics(ds)
print("CoV energy %.3f, CoV carbon %.3f, r %.3f" % (
    stats["cov_energy_per_panel"], stats["cov_carbon_per_panel"], stats["pearson_energy_carbon"]))

###############################################################################
# Split the carbon/energy plane at the means.

q = quadrant_stats(table)
print({k: round(v, 3) for k, v in q.as_dict().items()})

###############################################################################
# In the default synthetic profile, adoption leans away from carbon-rich ZIPs.

carbon = ds.column("carbon_per_panel")
existing = ds.column("existing_installs")
print("r(carbon/panel, installs) = %.3f" % pearson(carbon, existing))

# quadratic fit of installs on carbon total, one per quartile
for fit in quantile_fits(ds):
    print(fit.quantile_index, fit.n_points, " ".join("%.3g" % c for c in fit.coefficients))
