"""
Impact curves over a grid of deployment budgets.

Every (strategy, budget) cell is an independent allocation on the untouched
dataset, so cells can be evaluated in any order or in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from sitegrid.dataset import Dataset
from sitegrid.strategies import DEFAULT_ROSTER, Strategy, StrategyError, capacities, check_attribute, plan_impacts

DEFAULT_GRID = tuple(range(0, 1_800_001, 100_000))
DEFAULT_MULTIPLIERS = (2.0, 3.0, 4.0)
METRICS = ("energy", "carbon")


class ProjectionError(ValueError):
    pass


@dataclass(frozen=True)
class ProjectionConfig:
    n_grid: tuple[int, ...] = DEFAULT_GRID
    strategies: tuple[Strategy, ...] = DEFAULT_ROSTER
    multipliers: tuple[float, ...] = DEFAULT_MULTIPLIERS

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or grid[0] != 0:
            raise ProjectionError("budget grid must start at 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ProjectionError("budget grid must be strictly increasing")
        if any(n != m for n, m in zip(grid, self.n_grid)):
            raise ProjectionError("budgets must be whole panel counts")
        object.__setattr__(self, "n_grid", grid)
        names = [s.name for s in self.strategies]
        if len(set(names)) != len(names):
            raise ProjectionError("strategy names must be unique")


@dataclass(frozen=True)
class ProjectionCurve:
    strategy: str
    budgets: tuple[int, ...]
    energy: tuple[float, ...]
    carbon: tuple[float, ...]
    saturated: tuple[bool, ...]
    markers: tuple[float, ...] = field(default=())

    def series(self, metric: str) -> tuple[float, ...]:
        if metric not in METRICS:
            raise ProjectionError(f"metric must be one of {METRICS}, got {metric!r}")
        return getattr(self, metric)

    def at(self, metric: str, N: float) -> float:
        """Metric at budget ``N``, linearly interpolated between grid points."""
        if not self.budgets[0] <= N <= self.budgets[-1]:
            raise ProjectionError(f"budget {N} outside the grid")
        return float(np.interp(N, self.budgets, self.series(metric)))


def scenario_markers(dataset: Dataset, multipliers: Sequence[float] = DEFAULT_MULTIPLIERS) -> tuple[float, ...]:
    """Panels to add for the existing stock to reach each multiple of itself."""
    existing = math.fsum(z.existing_installs for z in dataset.zips)
    return tuple((m - 1.0) * existing for m in multipliers)


def _validate(config: ProjectionConfig) -> None:
    for s in config.strategies:
        for a in s.attributes():
            try:
                check_attribute(a)
            except StrategyError as exc:
                raise ProjectionError(f"strategy {s.name}: {exc}") from None


def _cell(dataset: Dataset, strategy: Strategy, N: int) -> tuple[float, float, bool]:
    plan = strategy.allocate(dataset, N)
    energy, carbon = plan_impacts(dataset, plan)
    return energy, carbon, plan.saturated


def run_projection(dataset: Dataset, config: ProjectionConfig | None = None, workers: int = 1) -> list[ProjectionCurve]:
    """One curve per strategy, in config order.

    ``workers > 1`` evaluates cells on a thread pool; results are identical
    to the sequential run.
    """
    config = config or ProjectionConfig()
    _validate(config)
    capacities(dataset)  # warm the shared cache before any threads start
    cells = [(s, N) for s in config.strategies for N in config.n_grid]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _cell(dataset, *c), cells))
    else:
        results = [_cell(dataset, s, N) for s, N in cells]
    markers = scenario_markers(dataset, config.multipliers)
    curves = []
    k = len(config.n_grid)
    for j, s in enumerate(config.strategies):
        chunk = results[j * k:(j + 1) * k]
        curves.append(
            ProjectionCurve(
                strategy=s.name,
                budgets=config.n_grid,
                energy=tuple(r[0] for r in chunk),
                carbon=tuple(r[1] for r in chunk),
                saturated=tuple(r[2] for r in chunk),
                markers=markers,
            )
        )
    return curves


def percent_of(curve_a: ProjectionCurve, curve_b: ProjectionCurve, metric: str, N: int) -> float:
    """100 * metric of ``curve_a`` over metric of ``curve_b`` at grid budget ``N``."""
    try:
        a = curve_a.series(metric)[curve_a.budgets.index(N)]
        b = curve_b.series(metric)[curve_b.budgets.index(N)]
    except ValueError:
        raise ProjectionError(f"budget {N} is not on both grids") from None
    if b == 0:
        raise ProjectionError(f"{curve_b.strategy} has zero {metric} at N={N}")
    return 100.0 * a / b


def crossover_budget(curve: ProjectionCurve, target: float, metric: str) -> float | None:
    """Smallest budget at which the curve reaches ``target``.

    Interpolates linearly between grid points.  Returns ``None`` when the
    target lies beyond the grid.
    """
    values = curve.series(metric)
    budgets = curve.budgets
    for i, v in enumerate(values):
        if v >= target:
            if i == 0:
                return float(budgets[0])
            v0 = values[i - 1]
            frac = (target - v0) / (v - v0)
            return budgets[i - 1] + frac * (budgets[i] - budgets[i - 1])
    return None


def crossover_report(
    curves: Sequence[ProjectionCurve],
    baseline: str,
    metric: str = "carbon",
    marker_index: int = -1,
) -> list[dict]:
    """Budget each strategy needs to match the baseline at a scenario marker.

    The target is the baseline's metric at the marker budget (the last
    marker, i.e. the quadrupling scenario, by default).
    """
    by_name = {c.strategy: c for c in curves}
    if baseline not in by_name:
        raise ProjectionError(f"baseline strategy {baseline!r} not in the roster")
    base = by_name[baseline]
    if not base.markers:
        raise ProjectionError("curves carry no scenario markers")
    marker = base.markers[marker_index]
    if marker > base.budgets[-1]:
        return [
            {"strategy": c.strategy, "metric": metric, "marker_budget": marker, "target": None,
             "crossover_budget": None, "percent_of_marker": None, "beyond_grid": True}
            for c in curves
        ]
    target = base.at(metric, marker)
    rows = []
    for c in curves:
        n = crossover_budget(c, target, metric)
        rows.append(
            {
                "strategy": c.strategy,
                "metric": metric,
                "marker_budget": marker,
                "target": target,
                "crossover_budget": n,
                "percent_of_marker": None if n is None or marker == 0 else 100.0 * n / marker,
                "beyond_grid": n is None,
            }
        )
    return rows
