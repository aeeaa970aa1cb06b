import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sitegrid.strategies import (
    BUILTIN_STRATEGIES,
    DEFAULT_ROSTER,
    OrderingSpec,
    Strategy,
    StrategyError,
    UnknownAttributeError,
    capacities,
    greedy_alloc,
    largest_remainder,
    plan_impacts,
    remaining_capacity,
    round_robin_alloc,
    status_quo_alloc,
    weighted_alloc,
    weighted_scores,
)

from conftest import make_dataset, make_zip

CARBON = OrderingSpec("carbon_per_panel")


def brute_force_best(ds, N, per_panel):
    """Exhaustive search over integer allocations within capacity."""
    cap = [remaining_capacity(z) for z in ds.zips]
    target = min(N, sum(cap))
    best = None
    for alloc in itertools.product(*(range(c + 1) for c in cap)):
        if sum(alloc) != target:
            continue
        value = sum(a * v for a, v in zip(alloc, per_panel))
        best = value if best is None else max(best, value)
    return best


def test_remaining_capacity_floors():
    assert remaining_capacity(make_zip("00001", 3, 10.7)) == 7
    assert remaining_capacity(make_zip("00001", 5, 5)) == 0


# -- greedy ------------------------------------------------------------------------


def test_greedy_carbon_example(three_zip):
    plan = greedy_alloc(three_zip, CARBON, 4)
    assert plan.placements == {"00002": 2, "00003": 2}
    assert plan_impacts(three_zip, plan) == (1400.0, 70.0)


def test_greedy_matches_brute_force(three_zip):
    carbon = [10, 20, 15]
    for N in range(0, 12):
        plan = greedy_alloc(three_zip, CARBON, N)
        assert plan_impacts(three_zip, plan)[1] == brute_force_best(three_zip, N, carbon)


@given(
    st.lists(st.tuples(st.integers(0, 3), st.integers(1, 4), st.integers(1, 50)), min_size=1, max_size=4),
    st.integers(0, 14),
)
@settings(max_examples=60, deadline=None)
def test_greedy_optimal_property(rows, N):
    zips = [make_zip(f"{i:05d}", e, e + c, carbon_pp=pp) for i, (e, c, pp) in enumerate(rows)]
    ds = make_dataset(*zips)
    plan = greedy_alloc(ds, CARBON, N)
    assert plan_impacts(ds, plan)[1] == brute_force_best(ds, N, [pp for _, _, pp in rows])


def test_greedy_ties_by_zip_code():
    ds = make_dataset(make_zip("00002", 0, 2), make_zip("00001", 0, 2))
    assert greedy_alloc(ds, CARBON, 2).placements == {"00001": 2}


def test_greedy_missing_value_last():
    ds = make_dataset(make_zip("00001", 0, 2), make_zip("00002", 0, 2, race_share_black=0.1))
    plan = greedy_alloc(ds, OrderingSpec("race_share_black"), 3)
    assert plan.placements == {"00002": 2, "00001": 1}


def test_greedy_saturation(three_zip):
    plan = greedy_alloc(three_zip, CARBON, 50)
    assert plan.total_placed == int(capacities(three_zip).sum()) == 10
    assert plan.saturated
    assert not greedy_alloc(three_zip, CARBON, 10).saturated


@pytest.mark.parametrize("N", [-1, 2.5])
def test_bad_budget(three_zip, N):
    with pytest.raises(StrategyError):
        greedy_alloc(three_zip, CARBON, N)


# -- status quo ----------------------------------------------------------------


def test_largest_remainder_examples():
    assert largest_remainder(np.array([1.0, 3.0, 6.0]), 10).tolist() == [1, 3, 6]
    assert largest_remainder(np.array([10 / 3] * 3), 10).tolist() == [4, 3, 3]
    assert largest_remainder(np.array([0.5, 0.5]), 1).tolist() == [1, 0]


def test_status_quo_three_zip(three_zip):
    plan = status_quo_alloc(three_zip, 4)
    assert plan.placements == {"00001": 1, "00002": 2, "00003": 1}
    assert plan_impacts(three_zip, plan)[1] == 65.0


def test_status_quo_proportional_example():
    ds = make_dataset(*(make_zip(f"{i:05d}", e, 1000) for i, e in enumerate((10, 30, 60))))
    assert status_quo_alloc(ds, 10).placements == {"00000": 1, "00001": 3, "00002": 6}


def test_status_quo_equal_weights():
    ds = make_dataset(*(make_zip(f"{i:05d}", 5, 100) for i in range(3)))
    assert status_quo_alloc(ds, 10).placements == {"00000": 4, "00001": 3, "00002": 3}


@given(st.lists(st.integers(1, 100), min_size=1, max_size=8), st.integers(0, 200))
@settings(max_examples=80, deadline=None)
def test_status_quo_within_one_of_quota(existing, N):
    ds = make_dataset(*(make_zip(f"{i:05d}", e, e + 10_000) for i, e in enumerate(existing)))
    placed = status_quo_alloc(ds, N).as_array(ds)
    total = sum(existing)
    assert placed.sum() == N
    for p, e in zip(placed, existing):
        assert abs(p - N * e / total) < 1


def test_status_quo_redistributes_capped_overflow():
    ds = make_dataset(make_zip("00001", 90, 92), make_zip("00002", 5, 100), make_zip("00003", 5, 100))
    plan = status_quo_alloc(ds, 20)
    assert plan.placements == {"00001": 2, "00002": 9, "00003": 9}


def test_status_quo_uniform_fallback():
    ds = make_dataset(make_zip("00001", 4, 5), make_zip("00002", 0, 10), make_zip("00003", 0, 10))
    plan = status_quo_alloc(ds, 7)
    assert plan.placements == {"00001": 1, "00002": 3, "00003": 3}


def test_status_quo_no_existing():
    with pytest.raises(StrategyError):
        status_quo_alloc(make_dataset(make_zip("00001", 0, 5)), 3)


# -- round robin ---------------------------------------------------------------


def test_round_robin_three_zip(three_zip):
    # energy list takes 00001 first, carbon list then takes 00002
    assert round_robin_alloc(three_zip, N=4).placements == {"00001": 3, "00002": 1}
    assert round_robin_alloc(three_zip, N=10).placements == {"00001": 3, "00002": 2, "00003": 5}


def test_round_robin_single_list_is_greedy(synth_500):
    for N in (0, 1000, 50_000):
        assert round_robin_alloc(synth_500, (CARBON,), N).placements == greedy_alloc(synth_500, CARBON, N).placements


def test_round_robin_lists_take_turns():
    # four ZIPs; each default list prefers a different one
    ds = make_dataset(
        make_zip("00001", 0, 2, energy_pp=900, carbon_pp=1, race_share_black=0.0, median_income=90e3),
        make_zip("00002", 0, 2, energy_pp=100, carbon_pp=900, race_share_black=0.0, median_income=90e3),
        make_zip("00003", 0, 2, energy_pp=100, carbon_pp=1, race_share_black=0.9, median_income=90e3),
        make_zip("00004", 0, 2, energy_pp=100, carbon_pp=1, race_share_black=0.0, median_income=10e3),
    )
    assert round_robin_alloc(ds, N=8).placements == {c: 2 for c in ("00001", "00002", "00003", "00004")}
    assert round_robin_alloc(ds, N=5).placements == {"00001": 2, "00002": 2, "00003": 1}


def test_round_robin_needs_orderings(three_zip):
    with pytest.raises(StrategyError):
        round_robin_alloc(three_zip, (), 3)


# -- weighted ------------------------------------------------------------------


def test_weighted_hand_scores(three_zip):
    scores = weighted_scores(three_zip, {"carbon_per_panel": 1, "median_income": 1}, ascending=("median_income",))
    assert scores == pytest.approx([0.0, 2.0, 1.1])
    plan = weighted_alloc(three_zip, {"carbon_per_panel": 1, "energy_per_panel": 2}, 4)
    # scores: A 2.0, B 1.0, C 1.5
    assert plan.placements == {"00001": 3, "00003": 1}


def test_weighted_single_attribute_is_greedy(synth_500):
    for N in (500, 20_000):
        assert (weighted_alloc(synth_500, {"carbon_per_panel": 1}, N).placements
                == greedy_alloc(synth_500, CARBON, N).placements)


def test_weighted_scale_invariant(synth_500):
    a = weighted_alloc(synth_500, {"carbon_per_panel": 1, "race_share_black": 2}, 30_000)
    b = weighted_alloc(synth_500, {"carbon_per_panel": 5, "race_share_black": 10}, 30_000)
    assert a.placements == b.placements


def test_weighted_missing_attribute_scores_last():
    ds = make_dataset(make_zip("00001", 0, 2), make_zip("00002", 0, 2, race_share_black=0.0))
    assert weighted_scores(ds, {"race_share_black": 1})[0] == -np.inf
    assert weighted_alloc(ds, {"race_share_black": 1}, 3).placements == {"00002": 2, "00001": 1}


def test_weighted_needs_nonzero_weight(three_zip):
    with pytest.raises(StrategyError):
        weighted_alloc(three_zip, {"carbon_per_panel": 0}, 3)


# -- specs -----------------------------------------------------------------------


def test_unknown_attribute():
    with pytest.raises(UnknownAttributeError, match="not_a_field"):
        OrderingSpec("not_a_field")
    with pytest.raises(StrategyError):
        Strategy.from_dict({"name": "x", "kind": "weighted", "weights": {"nope": 1}})


def test_strategy_dict_round_trip():
    for s in DEFAULT_ROSTER:
        assert Strategy.from_dict(s.to_dict()) == s
    w = Strategy("mix", "weighted", weights={"carbon_per_panel": 1.0, "median_income": 0.5}, ascending=("median_income",))
    assert Strategy.from_dict(w.to_dict()) == w


def test_default_roster_names():
    assert list(BUILTIN_STRATEGIES) == [
        "status_quo", "energy_efficient", "carbon_efficient", "racial_equity", "income_equity", "round_robin",
    ]


def test_every_strategy_respects_capacity(synth_500):
    cap = capacities(synth_500)
    for s in DEFAULT_ROSTER:
        for N in (0, 7, 100_000, 10**9):
            placed = s.allocate(synth_500, N).as_array(synth_500)
            assert (placed >= 0).all() and (placed <= cap).all()
            assert placed.sum() == min(N, cap.sum())
