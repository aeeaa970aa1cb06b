"""
Median-split equity analysis.

Units (ZIP codes or states) are split at the median of a demographic
attribute and each group's mean realized potential and carbon offset per
panel is compared with the national mean over all units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from sitegrid.dataset import RACE_FIELDS, VOTE_FIELDS, Dataset, StateRecord, aggregate_states
from sitegrid.strategies import ATTRIBUTES, PlacementPlan, StrategyError, capacities, check_attribute


class EquityError(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    attribute: str
    direction: str = "above"  # "above" | "below" the median
    granularity: str = "zip"  # "zip" | "state"

    def __post_init__(self):
        check_attribute(self.attribute)
        if self.direction not in ("above", "below"):
            raise EquityError(f"direction must be 'above' or 'below', got {self.direction!r}")
        if self.granularity not in ("zip", "state"):
            raise EquityError(f"granularity must be 'zip' or 'state', got {self.granularity!r}")

    @property
    def label(self) -> str:
        return f"{self.attribute} {'>' if self.direction == 'above' else '<='} median"


@dataclass(frozen=True)
class EquityEntry:
    spec: SplitSpec
    median: float
    group_size: int
    group_realized: float | None
    group_carbon: float | None
    realized_ratio: float | None
    carbon_ratio: float | None
    realized_pct_diff: float | None
    carbon_pct_diff: float | None


@dataclass(frozen=True)
class EquityReport:
    granularity: str
    weighting: str
    n_units: int
    national_realized: float
    national_carbon: float
    entries: tuple[EquityEntry, ...]
    placement: str | None = None
    panels_placed: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "granularity": self.granularity,
            "weighting": self.weighting,
            "n_units": self.n_units,
            "national_realized_potential": self.national_realized,
            "national_carbon_per_panel": self.national_carbon,
            "placement": self.placement,
            "panels_placed": self.panels_placed,
            "groups": [
                {
                    "attribute": e.spec.attribute,
                    "direction": e.spec.direction,
                    "label": e.spec.label,
                    "median": e.median,
                    "group_size": e.group_size,
                    "realized_potential": e.group_realized,
                    "carbon_per_panel": e.group_carbon,
                    "realized_ratio": e.realized_ratio,
                    "carbon_ratio": e.carbon_ratio,
                    "realized_pct_diff": e.realized_pct_diff,
                    "carbon_pct_diff": e.carbon_pct_diff,
                }
                for e in self.entries
            ],
        }

    def bar_rows(self) -> list[tuple[str, str, float | None]]:
        """(group, metric, ratio) rows in the layout of the bar charts."""
        rows = []
        for e in self.entries:
            rows.append((e.spec.label, "realized_potential", e.realized_ratio))
            rows.append((e.spec.label, "carbon_per_panel", e.carbon_ratio))
        return rows


DEFAULT_SPLIT_ATTRIBUTES = RACE_FIELDS + ("median_income",) + VOTE_FIELDS[:1]


def default_split_specs(granularity: str = "zip") -> list[SplitSpec]:
    return [
        SplitSpec(a, d, granularity)
        for a in DEFAULT_SPLIT_ATTRIBUTES
        for d in ("above", "below")
    ]


def median_split(units: Sequence[Any], attribute: str) -> tuple[list[Any], list[Any]]:
    """Split units at the empirical median of ``attribute``.

    Units strictly above the median form the first group; units at or below
    it the second.  Units without a value are left out of both.  ``units``
    need a ``get(attribute)`` method.
    """
    valued = [(u, u.get(attribute)) for u in units]
    valued = [(u, v) for u, v in valued if v is not None and not np.isnan(v)]
    if not valued:
        raise EquityError(f"attribute {attribute!r} is missing on every unit")
    if len(valued) < 2:
        raise EquityError(f"attribute {attribute!r} is present on fewer than 2 units")
    median = float(np.median([v for _, v in valued]))
    above = [u for u, v in valued if v > median]
    below = [u for u, v in valued if v <= median]
    return above, below


@dataclass(frozen=True)
class _Unit:
    code: str
    realized: float
    carbon: float
    weight: float
    attrs: dict

    def get(self, name: str) -> float | None:
        return self.attrs.get(name)


def _placed_array(dataset: Dataset, placement: PlacementPlan | None) -> np.ndarray:
    if placement is None:
        return np.zeros(len(dataset), dtype=np.int64)
    try:
        placed = placement.as_array(dataset)
    except StrategyError as exc:
        raise EquityError(str(exc)) from None
    if np.any(placed < 0) or np.any(placed > capacities(dataset)):
        raise EquityError("placement exceeds remaining capacity")
    return placed


def _zip_realized(dataset: Dataset, placed: np.ndarray) -> np.ndarray:
    existing = dataset.column("existing_installs") + placed
    potential = dataset.column("potential_installs")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(potential > 0, 100.0 * existing / np.where(potential > 0, potential, 1.0), np.nan)


def _mean_skip(values) -> float | None:
    total, n = 0.0, 0
    for v in values:
        if v is not None and not np.isnan(v):
            total += v
            n += 1
    return total / n if n else None


def build_units(dataset: Dataset, granularity: str, placement: PlacementPlan | None = None) -> list[_Unit]:
    """Units carrying realized potential (after any placement), carbon per panel and attributes."""
    placed = _placed_array(dataset, placement)
    realized = _zip_realized(dataset, placed)
    carbon = dataset.column("carbon_per_panel")
    attrs_all = ATTRIBUTES
    if granularity == "zip":
        units = []
        for i, z in enumerate(dataset.zips):
            if np.isnan(realized[i]):
                continue
            pop = z.population
            units.append(_Unit(z.zip_code, float(realized[i]), float(carbon[i]), float(pop or 0.0),
                               {a: z.get(a) for a in attrs_all}))
        return units

    states = {s.state_code: s for s in (dataset.states or aggregate_states(dataset).states)}
    members: dict[str, list[int]] = {}
    for i, z in enumerate(dataset.zips):
        members.setdefault(z.state_code, []).append(i)
    units = []
    for code in sorted(members):
        idx = members[code]
        r = _mean_skip(realized[i] for i in idx)
        c = _mean_skip(carbon[i] for i in idx)
        if r is None or c is None:
            continue
        record: StateRecord | None = states.get(code)
        attrs = {}
        for a in attrs_all:
            value = None
            if record is not None:
                try:
                    value = record.get(a)
                except KeyError:
                    value = None
            if value is None:
                value = _mean_skip(dataset.zips[i].get(a) for i in idx)
            attrs[a] = value
        pops = [dataset.zips[i].population for i in idx if dataset.zips[i].population is not None]
        units.append(_Unit(code, r, c, float(sum(pops)), attrs))
    return units


def _group_mean(units: Sequence[_Unit], field_name: str, weighting: str) -> float | None:
    if not units:
        return None
    values = np.array([getattr(u, field_name) for u in units])
    if weighting == "population":
        w = np.array([u.weight for u in units])
        if w.sum() <= 0:
            return None
        return float(np.sum(w * values) / np.sum(w))
    total = 0.0
    for v in values:
        total += float(v)
    return total / len(values)


def equity_report(
    dataset: Dataset,
    specs: Sequence[SplitSpec] | None = None,
    placement: PlacementPlan | None = None,
    *,
    granularity: str | None = None,
    weighting: str = "unit",
) -> EquityReport:
    """Compare median-split groups with the national mean.

    With a ``placement`` the placed panels are added to each ZIP's existing
    installs before realized potential is computed; carbon offset per panel
    does not depend on installs and is unchanged.  All specs in one report
    share a granularity (the first spec's, unless ``granularity`` is given).
    """
    if weighting not in ("unit", "population"):
        raise EquityError(f"weighting must be 'unit' or 'population', got {weighting!r}")
    if specs is None:
        specs = default_split_specs(granularity or "zip")
    if not specs:
        raise EquityError("no split specs given")
    granularity = granularity or specs[0].granularity
    if any(s.granularity != granularity for s in specs):
        raise EquityError("all split specs in a report must share one granularity")

    units = build_units(dataset, granularity, placement)
    if not units:
        raise EquityError("no units with viable panel sites")
    nat_r = _group_mean(units, "realized", weighting)
    nat_c = _group_mean(units, "carbon", weighting)

    entries = []
    for spec in specs:
        above, below = median_split(units, spec.attribute)
        group = above if spec.direction == "above" else below
        median = float(np.median([u.get(spec.attribute) for u in above + below]))
        gr = _group_mean(group, "realized", weighting)
        gc = _group_mean(group, "carbon", weighting)
        rr = gr / nat_r if gr is not None and nat_r else None
        cr = gc / nat_c if gc is not None and nat_c else None
        entries.append(
            EquityEntry(
                spec=spec,
                median=median,
                group_size=len(group),
                group_realized=gr,
                group_carbon=gc,
                realized_ratio=rr,
                carbon_ratio=cr,
                realized_pct_diff=None if rr is None else (rr - 1.0) * 100.0,
                carbon_pct_diff=None if cr is None else (cr - 1.0) * 100.0,
            )
        )
    return EquityReport(
        granularity=granularity,
        weighting=weighting,
        n_units=len(units),
        national_realized=nat_r,
        national_carbon=nat_c,
        entries=tuple(entries),
        placement=placement.strategy if placement is not None else None,
        panels_placed=placement.total_placed if placement is not None else 0,
    )
