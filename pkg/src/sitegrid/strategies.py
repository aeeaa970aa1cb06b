"""
Panel siting strategies.

Each strategy maps a budget of ``N`` new panels to whole-panel placements
across ZIP codes, never exceeding a ZIP's remaining rooftop capacity and
always placing ``min(N, total remaining capacity)`` panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from sitegrid.dataset import DERIVED_FIELDS, ZIP_NUMERIC_FIELDS, Dataset, ZipRecord


class StrategyError(ValueError):
    pass


class UnknownAttributeError(StrategyError, KeyError):
    def __str__(self) -> str:
        return f"unknown attribute {self.args[0]!r}"


ATTRIBUTES = ZIP_NUMERIC_FIELDS + DERIVED_FIELDS


def check_attribute(name: str) -> str:
    if name not in ATTRIBUTES:
        raise UnknownAttributeError(name)
    return name


@dataclass(frozen=True)
class OrderingSpec:
    attribute: str
    direction: str = "descending"

    def __post_init__(self):
        check_attribute(self.attribute)
        if self.direction not in ("descending", "ascending"):
            raise StrategyError(f"direction must be 'descending' or 'ascending', got {self.direction!r}")

    def order(self, dataset: Dataset) -> np.ndarray:
        """ZIP indices best-first; ties by ZIP code, missing values last."""
        values = np.array(dataset.column(self.attribute))
        key = -values if self.direction == "descending" else values
        key[np.isnan(key)] = np.inf
        # dataset.zips is sorted by zip_code, so the index is the tie-break
        return np.lexsort((np.arange(len(values)), key))


@dataclass(frozen=True)
class PlacementPlan:
    strategy: str
    budget: int
    placements: Mapping[str, int]
    total_placed: int
    saturated: bool = False

    def as_array(self, dataset: Dataset) -> np.ndarray:
        out = np.zeros(len(dataset), dtype=np.int64)
        index = dataset.zip_index
        for code, n in self.placements.items():
            try:
                out[index[code]] = n
            except KeyError:
                raise StrategyError(f"placement references unknown ZIP {code}") from None
        return out


def remaining_capacity(record: ZipRecord) -> int:
    return max(0, math.floor(record.potential_installs - record.existing_installs))


def capacities(dataset: Dataset) -> np.ndarray:
    cache = dataset.__dict__.get("_capacities")
    if cache is None:
        cache = np.array([remaining_capacity(z) for z in dataset.zips], dtype=np.int64)
        cache.flags.writeable = False
        dataset.__dict__["_capacities"] = cache
    return cache


def _plan(name: str, dataset: Dataset, N: int, placed: np.ndarray, cap: np.ndarray) -> PlacementPlan:
    placements = {dataset.zips[i].zip_code: int(placed[i]) for i in np.flatnonzero(placed)}
    total = int(placed.sum())
    return PlacementPlan(name, int(N), placements, total, saturated=N > int(cap.sum()))


def _check_budget(N) -> int:
    if N < 0 or int(N) != N:
        raise StrategyError(f"budget must be a nonnegative integer, got {N!r}")
    return int(N)


def _fill_in_order(order: np.ndarray, cap: np.ndarray, N: int) -> np.ndarray:
    ordered_cap = cap[order]
    before = np.cumsum(ordered_cap) - ordered_cap
    take = np.clip(N - before, 0, ordered_cap)
    placed = np.zeros_like(cap)
    placed[order] = take
    return placed


def greedy_alloc(dataset: Dataset, ordering: OrderingSpec, N: int, name: str | None = None) -> PlacementPlan:
    """Fill ZIPs to capacity in ordering order until the budget is spent."""
    N = _check_budget(N)
    cap = capacities(dataset)
    placed = _fill_in_order(ordering.order(dataset), cap, N)
    return _plan(name or f"greedy_{ordering.attribute}", dataset, N, placed, cap)


def largest_remainder(quotas: np.ndarray, seats: int) -> np.ndarray:
    """Hamilton apportionment of ``seats`` integer units to real ``quotas``.

    Remainder ties go to the lower index.
    """
    base = np.floor(quotas).astype(np.int64)
    extra = seats - int(base.sum())
    if extra < 0:
        # float rounding pushed floors over the seat count; take back from smallest remainders
        order = np.lexsort((-np.arange(len(quotas)), quotas - base))
        for i in order[: -extra]:
            base[i] -= 1
        return base
    if extra:
        order = np.lexsort((np.arange(len(quotas)), -(quotas - base)))
        base[order[:extra]] += 1
    return base


def status_quo_alloc(dataset: Dataset, N: int, name: str = "status_quo") -> PlacementPlan:
    """Allocate in proportion to existing installs.

    Shares are integerized by largest remainder.  A ZIP whose share exceeds
    its remaining capacity is capped and the overflow is re-apportioned over
    the uncapped ZIPs with the same weights.  Should every weighted ZIP fill
    up while budget and capacity remain, the rest is spread evenly over the
    ZIPs without existing installs.
    """
    N = _check_budget(N)
    weights = dataset.column("existing_installs")
    if not np.nansum(weights) > 0:
        raise StrategyError("status quo undefined: no existing installs")
    cap = capacities(dataset)
    target = min(N, int(cap.sum()))
    placed = np.zeros_like(cap)
    active = (weights > 0) & (cap > 0)
    uniform = False
    while True:
        left = target - int(placed.sum())
        if left == 0:
            break
        if not active.any():
            # weighted ZIPs exhausted
            active = placed < cap
            uniform = True
        idx = np.flatnonzero(active)
        w = np.ones(len(idx)) if uniform else weights[idx]
        share = largest_remainder(left * w / w.sum(), left)
        trial = placed[idx] + share
        room = cap[idx]
        over = trial >= room
        placed[idx] = np.minimum(trial, room)
        active[idx[over]] = False
    return _plan(name, dataset, N, placed, cap)


DEFAULT_ROUND_ROBIN = (
    OrderingSpec("energy_per_panel", "descending"),
    OrderingSpec("carbon_per_panel", "descending"),
    OrderingSpec("race_share_black", "descending"),
    OrderingSpec("median_income", "ascending"),
)


def round_robin_alloc(
    dataset: Dataset,
    orderings: Sequence[OrderingSpec] = DEFAULT_ROUND_ROBIN,
    N: int = 0,
    name: str = "round_robin",
) -> PlacementPlan:
    """Take turns across ranked ZIP lists, one whole ZIP per turn.

    On its turn a list claims its best ZIP that still has capacity and has
    not been claimed by any list, and fills it (partially if that spends the
    budget).
    """
    N = _check_budget(N)
    if not orderings:
        raise StrategyError("round robin needs at least one ordering")
    cap = capacities(dataset)
    orders = [o.order(dataset) for o in orderings]
    pointers = [0] * len(orders)
    taken = cap == 0
    placed = np.zeros_like(cap)
    left = min(N, int(cap.sum()))
    while left > 0:
        before = left
        for k, order in enumerate(orders):
            if left == 0:
                break
            p = pointers[k]
            while p < len(order) and taken[order[p]]:
                p += 1
            pointers[k] = p
            if p == len(order):
                continue
            i = order[p]
            take = min(int(cap[i]), left)
            placed[i] = take
            taken[i] = True
            left -= take
        if left == before:
            raise StrategyError("round robin stalled with budget left")  # unreachable: left <= free capacity
    return _plan(name, dataset, N, placed, cap)


def weighted_scores(
    dataset: Dataset,
    weights: Mapping[str, float],
    ascending: Sequence[str] = (),
) -> np.ndarray:
    """Sum of weight times min-max normalized attribute.

    Attributes named in ``ascending`` are negated first so that lower raw
    values score higher.  A ZIP missing any weighted attribute scores -inf.
    """
    if not weights or all(w == 0 for w in weights.values()):
        raise StrategyError("weighted policy needs at least one nonzero weight")
    for name in list(weights) + list(ascending):
        check_attribute(name)
    score = np.zeros(len(dataset))
    for name in sorted(weights):
        w = weights[name]
        if w == 0:
            continue
        values = np.array(dataset.column(name))
        if name in ascending:
            values = -values
        finite = ~np.isnan(values)
        lo, hi = (values[finite].min(), values[finite].max()) if finite.any() else (0.0, 0.0)
        norm = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
        norm[~finite] = -np.inf
        score = score + w * norm
    return score


def weighted_alloc(
    dataset: Dataset,
    weights: Mapping[str, float],
    N: int,
    ascending: Sequence[str] = (),
    name: str = "weighted",
) -> PlacementPlan:
    N = _check_budget(N)
    score = weighted_scores(dataset, weights, ascending)
    score = np.where(np.isnan(score), -np.inf, score)
    order = np.lexsort((np.arange(len(score)), -score))
    cap = capacities(dataset)
    return _plan(name, dataset, N, _fill_in_order(order, cap, N), cap)


def plan_impacts(dataset: Dataset, plan: PlacementPlan) -> tuple[float, float]:
    """Yearly energy (kWh) and carbon offset (kg) added by a plan.

    Sums are exactly rounded so that plans placing the same panels compare
    equal regardless of iteration order.
    """
    placed = plan.as_array(dataset)
    idx = np.flatnonzero(placed)
    energy = dataset.column("energy_per_panel")[idx]
    carbon = dataset.column("carbon_per_panel")[idx]
    counts = placed[idx]
    return (
        math.fsum((counts * energy).tolist()),
        math.fsum((counts * carbon).tolist()),
    )


# ---------------------------------------------------------------------------
# Strategy specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Strategy:
    """A named, parameterized siting rule.

    ``kind`` is one of ``greedy``, ``status_quo``, ``round_robin`` or
    ``weighted``.
    """

    name: str
    kind: str
    orderings: tuple[OrderingSpec, ...] = ()
    weights: Mapping[str, float] = field(default_factory=dict)
    ascending: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("greedy", "status_quo", "round_robin", "weighted"):
            raise StrategyError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "greedy" and len(self.orderings) != 1:
            raise StrategyError(f"{self.name}: greedy strategy takes exactly one ordering")
        if self.kind == "round_robin" and not self.orderings:
            raise StrategyError(f"{self.name}: round robin needs at least one ordering")
        if self.kind == "weighted":
            if not self.weights or all(w == 0 for w in self.weights.values()):
                raise StrategyError(f"{self.name}: weighted policy needs at least one nonzero weight")
            for a in list(self.weights) + list(self.ascending):
                check_attribute(a)

    def allocate(self, dataset: Dataset, N: int) -> PlacementPlan:
        if self.kind == "greedy":
            return greedy_alloc(dataset, self.orderings[0], N, name=self.name)
        if self.kind == "status_quo":
            return status_quo_alloc(dataset, N, name=self.name)
        if self.kind == "round_robin":
            return round_robin_alloc(dataset, self.orderings, N, name=self.name)
        return weighted_alloc(dataset, self.weights, N, self.ascending, name=self.name)

    def attributes(self) -> list[str]:
        return [o.attribute for o in self.orderings] + list(self.weights) + list(self.ascending)

    def to_dict(self) -> dict:
        out: dict = {"name": self.name, "kind": self.kind}
        if self.orderings:
            out["orderings"] = [{"attribute": o.attribute, "direction": o.direction} for o in self.orderings]
        if self.weights:
            out["weights"] = dict(sorted(self.weights.items()))
        if self.ascending:
            out["ascending"] = list(self.ascending)
        return out

    @classmethod
    def from_dict(cls, spec: Mapping) -> "Strategy":
        orderings = []
        if "attribute" in spec:
            orderings.append(OrderingSpec(spec["attribute"], spec.get("direction", "descending")))
        for o in spec.get("orderings", ()):
            orderings.append(OrderingSpec(o["attribute"], o.get("direction", "descending")))
        return cls(
            name=spec["name"],
            kind=spec["kind"],
            orderings=tuple(orderings),
            weights=dict(spec.get("weights", {})),
            ascending=tuple(spec.get("ascending", ())),
        )


STATUS_QUO = Strategy("status_quo", "status_quo")
ENERGY_GREEDY = Strategy("energy_efficient", "greedy", (OrderingSpec("energy_per_panel"),))
CARBON_GREEDY = Strategy("carbon_efficient", "greedy", (OrderingSpec("carbon_per_panel"),))
RACIAL_EQUITY = Strategy("racial_equity", "greedy", (OrderingSpec("race_share_black"),))
INCOME_EQUITY = Strategy("income_equity", "greedy", (OrderingSpec("median_income", "ascending"),))
ROUND_ROBIN = Strategy("round_robin", "round_robin", DEFAULT_ROUND_ROBIN)

DEFAULT_ROSTER = (STATUS_QUO, ENERGY_GREEDY, CARBON_GREEDY, RACIAL_EQUITY, INCOME_EQUITY, ROUND_ROBIN)
BUILTIN_STRATEGIES = {s.name: s for s in DEFAULT_ROSTER}
