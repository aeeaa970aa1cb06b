"""Rooftop PV siting analysis: ZIP-level potentials, equity statistics and siting strategy projections."""

from sitegrid.dataset import (
    Dataset,
    StateRecord,
    ZipRecord,
    aggregate_states,
    clean_join,
    parse_zip_csv,
    read_dataset,
    scale_by_coverage,
    write_dataset,
)
from sitegrid.equity import SplitSpec, equity_report, median_split
from sitegrid.metrics import (
    coefficient_of_variation,
    pearson,
    per_panel_metrics,
    polyfit_lse,
    per_panel_table,
    quadrant_stats,
    quantile_fits,
    quantile_partition,
    summary_statistics,
)
from sitegrid.projection import ProjectionConfig, crossover_budget, crossover_report, percent_of, run_projection, scenario_markers
from sitegrid.strategies import (
    DEFAULT_ROSTER,
    OrderingSpec,
    PlacementPlan,
    Strategy,
    greedy_alloc,
    plan_impacts,
    remaining_capacity,
    round_robin_alloc,
    status_quo_alloc,
    weighted_alloc,
)
from sitegrid.synth import synth_dataset, synth_tables

__version__ = "0.1.0"
