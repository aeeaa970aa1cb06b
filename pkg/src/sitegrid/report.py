"""
The four pipeline commands and the plot-ready files they emit.

Each ``cmd_*`` function takes a :class:`RunConfig`, computes everything in
memory first and only then writes its outputs (each one atomically), so a
failing run leaves no partial files behind.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path

from sitegrid.config import ConfigError, RunConfig
from sitegrid.dataset import (
    ACS_FIELDS,
    SUNROOF_FIELDS,
    VOTE_FIELDS,
    DatasetError,
    RawTable,
    aggregate_states,
    clean_join,
    parse_zip_csv,
    read_dataset,
    write_dataset,
)
from sitegrid.equity import EquityReport, equity_report
from sitegrid.io import csv_text, json_text, atomic_write_text
from sitegrid.metrics import per_panel_table, quadrant_stats, quantile_fits, summary_statistics
from sitegrid.projection import crossover_report, percent_of, run_projection
from sitegrid.synth import synth_dataset, synth_tables

log = logging.getLogger(__name__)


def _commit(out_dir: Path, files: dict[str, str]) -> dict[str, Path]:
    return {name: atomic_write_text(out_dir / name, text) for name, text in files.items()}


def _equity_files(report: EquityReport, stem: str) -> dict[str, str]:
    return {
        f"{stem}.json": json_text(report.to_dict()),
        f"{stem}_bars.csv": csv_text(("group", "metric", "ratio"), report.bar_rows()),
    }


def cmd_ingest(config: RunConfig) -> dict[str, Path]:
    """Parse, join, scale and aggregate the configured input files."""
    for key in ("sunroof", "acs"):
        if key not in config.inputs:
            raise ConfigError(f"ingest needs an input named {key!r}")
    tables = {key: parse_zip_csv(spec.path, spec.schema) for key, spec in config.inputs.items()}
    ds = clean_join(tables["sunroof"], tables["acs"], min_population=config.min_population)
    ds = aggregate_states(ds, tables.get("voting"), tables.get("energy_mix"))
    log.info("ingest: %d ZIPs, %d states", len(ds.zips), len(ds.states))
    return write_dataset(ds, config.out)


def cmd_analyze(config: RunConfig) -> dict[str, Path]:
    """Per-panel metrics, dispersion/correlation, quantile fits, quadrants and equity."""
    ds = read_dataset(config.dataset_dir)
    table, _ = per_panel_table(ds)
    state_of = {z.zip_code: z.state_code for z in ds.zips}
    stats = summary_statistics(ds)
    stats_weighted = summary_statistics(ds, weighted=True)
    quadrants = quadrant_stats(table, "carbon_per_panel", "energy_per_panel", config.quadrant_split, config.quadrant_split)
    fits = quantile_fits(ds, config.fit_x, config.fit_y, q=config.quantiles, degree=config.fit_degree)
    equity = equity_report(ds, config.split_specs(), granularity=config.granularity, weighting=config.weighting)

    files = {
        "metrics_by_zip.csv": csv_text(
            ("zip_code", "state_code", "energy_per_panel", "carbon_per_panel", "realized_potential"),
            [(m.zip_code, state_of[m.zip_code], m.energy_per_panel, m.carbon_per_panel, m.realized_potential)
             for m in table],
        ),
        "summary.json": json_text(
            {
                "unweighted": stats,
                "panel_weighted": stats_weighted,
                "quadrants": {
                    "x": "carbon_per_panel",
                    "y": "energy_per_panel",
                    "split_rule": config.quadrant_split,
                    "x_split": quadrants.x_split,
                    "y_split": quadrants.y_split,
                    "n": quadrants.n,
                    "shares": quadrants.as_dict(),
                },
            }
        ),
        "fits.json": json_text(
            {
                "x": config.fit_x,
                "y": config.fit_y,
                "partition": config.fit_x,
                "quantiles": config.quantiles,
                "degree": config.fit_degree,
                "fits": [
                    {"quantile_index": f.quantile_index, "coefficients": list(f.coefficients),
                     "pearson_r": f.pearson_r, "n_points": f.n_points}
                    for f in fits
                ],
            }
        ),
        **_equity_files(equity, "equity_report"),
    }
    return _commit(Path(config.out), files)


def cmd_project(config: RunConfig) -> dict[str, Path]:
    """Impact curves, comparisons, crossover, placements and post-placement equity."""
    names = [s.name for s in config.strategies]
    if config.baseline not in names:
        raise ConfigError(f"baseline strategy {config.baseline!r} is not in the roster {names}")
    ds = read_dataset(config.dataset_dir)
    pconf = config.projection_config()
    curves = run_projection(ds, pconf, workers=config.workers)
    by_name = {c.strategy: c for c in curves}
    base = by_name[config.baseline]
    n_max = pconf.n_grid[-1]

    files: dict[str, str] = {}
    for metric in ("energy", "carbon"):
        files[f"projection_{metric}.csv"] = csv_text(
            ("strategy", "N", "value"),
            [(c.strategy, n, v) for c in curves for n, v in zip(c.budgets, c.series(metric))],
        )
    files["markers.json"] = json_text(
        {
            "existing_installs_total": math.fsum(z.existing_installs for z in ds.zips),
            "multipliers": list(pconf.multipliers),
            "budgets": list(base.markers),
            "n_grid": list(pconf.n_grid),
        }
    )

    comparison = []
    for c in curves:
        for n in pconf.n_grid:
            row = [c.strategy, config.baseline, n]
            for metric in ("energy", "carbon"):
                try:
                    row.append(percent_of(c, base, metric, n))
                except ValueError:
                    row.append(None)
            comparison.append(row)
    files["comparison.csv"] = csv_text(
        ("strategy", "baseline", "N", "energy_pct_of_baseline", "carbon_pct_of_baseline"), comparison
    )
    files["crossover.json"] = json_text(
        {
            "baseline": config.baseline,
            "carbon": crossover_report(curves, config.baseline, "carbon"),
            "energy": crossover_report(curves, config.baseline, "energy"),
        }
    )

    plans = {s.name: s.allocate(ds, n_max) for s in config.strategies}
    for name, plan in plans.items():
        files[f"placements_{name}_{n_max}.csv"] = csv_text(
            ("zip_code", "panels_added"), sorted(plan.placements.items())
        )
    if config.equity_strategy in plans:
        specs = config.split_specs()
        pre = equity_report(ds, specs, granularity=config.granularity, weighting=config.weighting)
        post = equity_report(ds, specs, plans[config.equity_strategy], granularity=config.granularity,
                             weighting=config.weighting)
        files.update(_equity_files(pre, "equity_pre"))
        files.update(_equity_files(post, f"equity_post_{config.equity_strategy}"))
    else:
        log.warning("equity strategy %s not in roster; skipping post-placement equity", config.equity_strategy)
    return _commit(Path(config.out), files)


def _raw_csv(table: RawTable, columns) -> str:
    return csv_text(columns, [[row.values[c] for c in columns] for row in table])


def cmd_synth(config: RunConfig) -> dict[str, Path]:
    """Seeded synthetic inputs plus the cleaned files ``cmd_ingest`` would produce from them."""
    if config.n_zips < 1:
        raise DatasetError("synthetic dataset size must be at least 1")
    tables = synth_tables(config.seed, config.n_zips, config.profile)
    ds = synth_dataset(config.seed, config.n_zips, config.profile)
    out = Path(config.out)
    files = {
        "inputs/sunroof.csv": _raw_csv(tables.sunroof, SUNROOF_FIELDS),
        "inputs/acs.csv": _raw_csv(tables.acs, ACS_FIELDS),
        "inputs/voting.csv": _raw_csv(tables.voting, ("state_code",) + VOTE_FIELDS),
        "inputs/energy_mix.csv": _raw_csv(tables.energy_mix, ("state_code", "fuel", "generation")),
        "inputs/config.json": json_text(
            {
                "inputs": {
                    "sunroof": "sunroof.csv",
                    "acs": "acs.csv",
                    "voting": "voting.csv",
                    "energy_mix": "energy_mix.csv",
                },
                "out": "..",
                "seed": config.seed,
            }
        ),
    }
    written = _commit(out, files)
    written.update(write_dataset(ds, out))
    return written
