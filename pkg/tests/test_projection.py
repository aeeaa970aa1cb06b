import numpy as np
import pytest

from sitegrid.projection import (
    ProjectionConfig,
    ProjectionCurve,
    ProjectionError,
    crossover_budget,
    crossover_report,
    percent_of,
    run_projection,
    scenario_markers,
)
from sitegrid.strategies import CARBON_GREEDY, DEFAULT_ROSTER, STATUS_QUO, plan_impacts


def curve(carbon, budgets=(0, 10, 20), markers=()):
    return ProjectionCurve("c", tuple(budgets), tuple(carbon), tuple(carbon), (False,) * len(budgets), markers)


def test_crossover_interpolates():
    c = curve((0.0, 50.0, 80.0))
    assert crossover_budget(c, 65.0, "carbon") == pytest.approx(15.0)
    assert crossover_budget(c, 50.0, "carbon") == 10.0
    assert crossover_budget(c, 0.0, "carbon") == 0.0


def test_crossover_beyond_grid():
    assert crossover_budget(curve((0.0, 50.0, 80.0)), 90.0, "carbon") is None


def test_curve_at_interpolates():
    c = curve((0.0, 50.0, 80.0))
    assert c.at("carbon", 5) == 25.0
    with pytest.raises(ProjectionError):
        c.at("carbon", 21)


def test_markers(three_zip):
    assert scenario_markers(three_zip) == (4.0, 8.0, 12.0)


def test_grid_validation():
    with pytest.raises(ProjectionError):
        ProjectionConfig(n_grid=(5, 10))
    with pytest.raises(ProjectionError):
        ProjectionConfig(n_grid=(0, 10, 10))
    with pytest.raises(ProjectionError):
        ProjectionConfig(strategies=(STATUS_QUO, STATUS_QUO))


def test_projection_matches_plan_impacts(three_zip):
    curves = run_projection(three_zip, ProjectionConfig(tuple(range(12)), DEFAULT_ROSTER))
    for c, s in zip(curves, DEFAULT_ROSTER):
        assert c.strategy == s.name
        for N, e, co in zip(c.budgets, c.energy, c.carbon):
            assert (e, co) == plan_impacts(three_zip, s.allocate(three_zip, N))
        assert c.saturated[-1] and not c.saturated[10]


def test_percent_of_hand_value(three_zip):
    curves = run_projection(three_zip, ProjectionConfig((0, 4), (STATUS_QUO, CARBON_GREEDY)))
    sq, greedy = curves
    assert sq.carbon[1] == 65.0 and greedy.carbon[1] == 70.0
    assert percent_of(greedy, sq, "carbon", 4) == pytest.approx(1400 / 13)
    with pytest.raises(ProjectionError):
        percent_of(greedy, sq, "carbon", 0)
    with pytest.raises(ProjectionError):
        percent_of(greedy, sq, "carbon", 3)


def test_crossover_report_hand_value(three_zip):
    curves = run_projection(three_zip, ProjectionConfig(tuple(range(11)), (STATUS_QUO, CARBON_GREEDY), (2.0,)))
    rows = {r["strategy"]: r for r in crossover_report(curves, "status_quo", "carbon")}
    assert rows["status_quo"]["target"] == 65.0
    assert rows["status_quo"]["crossover_budget"] == pytest.approx(4.0)
    # greedy: 55 kg at N=3, 70 kg at N=4
    assert rows["carbon_efficient"]["crossover_budget"] == pytest.approx(3 + 10 / 15)
    assert rows["carbon_efficient"]["percent_of_marker"] == pytest.approx(100 * (3 + 10 / 15) / 4)


def test_crossover_report_marker_beyond_grid(three_zip):
    curves = run_projection(three_zip, ProjectionConfig(tuple(range(11)), (STATUS_QUO,)))
    (row,) = crossover_report(curves, "status_quo")
    assert row["beyond_grid"] and row["crossover_budget"] is None


def test_crossover_report_unknown_baseline(three_zip):
    curves = run_projection(three_zip, ProjectionConfig((0, 1), (STATUS_QUO,)))
    with pytest.raises(ProjectionError):
        crossover_report(curves, "nope")


def test_fresh_allocation_equals_incremental_greedy(synth_500):
    grid = tuple(range(0, 100_001, 20_000))
    (c,) = run_projection(synth_500, ProjectionConfig(grid, (CARBON_GREEDY,)))
    # greedy plans are nested, so adding the increments reproduces each point
    plans = [CARBON_GREEDY.allocate(synth_500, N).as_array(synth_500) for N in grid]
    for a, b in zip(plans, plans[1:]):
        assert (b >= a).all()
    per_panel = synth_500.column("carbon_per_panel")
    running = 0.0
    for i in range(1, len(grid)):
        running += float(((plans[i] - plans[i - 1]) * per_panel).sum())
        assert c.carbon[i] == pytest.approx(running, rel=1e-12)


def test_sequential_equals_parallel(synth_500):
    conf = ProjectionConfig(tuple(range(0, 200_001, 25_000)))
    assert run_projection(synth_500, conf) == run_projection(synth_500, conf, workers=4)


def test_curves_monotone_and_carbon_greedy_dominates(synth_500):
    curves = run_projection(synth_500, ProjectionConfig(tuple(range(0, 300_001, 30_000))))
    best = next(c for c in curves if c.strategy == "carbon_efficient")
    for c in curves:
        assert np.all(np.diff(c.carbon) >= 0) and np.all(np.diff(c.energy) >= 0)
        assert all(b >= v for b, v in zip(best.carbon, c.carbon))
