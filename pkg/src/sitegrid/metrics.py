"""
Per-panel potentials and descriptive statistics.

Everything here is a pure function of its inputs.  Series are plain
sequences or numpy arrays; records are :class:`~sitegrid.dataset.ZipRecord`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, TypeVar

import numpy as np

from sitegrid.dataset import Dataset, ZipRecord

T = TypeVar("T")


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class PerPanelMetrics:
    zip_code: str
    energy_per_panel: float
    carbon_per_panel: float
    realized_potential: float


@dataclass(frozen=True)
class FitResult:
    quantile_index: int
    coefficients: tuple[float, ...]  # ascending degree
    pearson_r: float | None  # None when either coordinate is constant
    n_points: int

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coefficients)


@dataclass(frozen=True)
class QuadrantShares:
    top_right: float
    top_left: float
    bottom_left: float
    bottom_right: float
    x_split: float
    y_split: float
    n: int

    def as_dict(self) -> dict[str, float]:
        return {
            "top_right": self.top_right,
            "top_left": self.top_left,
            "bottom_left": self.bottom_left,
            "bottom_right": self.bottom_right,
        }


def per_panel_metrics(record: ZipRecord) -> PerPanelMetrics:
    if not record.potential_installs > 0:
        raise MetricsError(f"{record.zip_code}: no viable panel sites")
    return PerPanelMetrics(
        zip_code=record.zip_code,
        energy_per_panel=record.energy_potential_total / record.potential_installs,
        carbon_per_panel=record.carbon_offset_total / record.potential_installs,
        realized_potential=100.0 * record.existing_installs / record.potential_installs,
    )


def per_panel_table(dataset: Dataset) -> tuple[list[PerPanelMetrics], int]:
    """Per-panel metrics for every ZIP with viable sites, plus the excluded count."""
    out = []
    excluded = 0
    for z in dataset.zips:
        if z.potential_installs > 0:
            out.append(per_panel_metrics(z))
        else:
            excluded += 1
    return out, excluded


def _as_array(values: Iterable[float]) -> np.ndarray:
    return np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)


def coefficient_of_variation(values: Sequence[float], weights: Sequence[float] | None = None) -> float:
    """Population standard deviation over mean.

    With ``weights`` the mean and variance are the weighted (frequency)
    versions.
    """
    x = _as_array(values)
    if x.size == 0:
        raise MetricsError("coefficient of variation of an empty series")
    if weights is None:
        mean = x.mean()
        var = ((x - mean) ** 2).mean()
    else:
        w = _as_array(weights)
        if w.shape != x.shape or w.sum() <= 0:
            raise MetricsError("weights must match values and have a positive sum")
        mean = np.average(x, weights=w)
        var = np.average((x - mean) ** 2, weights=w)
    if mean == 0:
        raise MetricsError("coefficient of variation undefined for zero mean")
    return float(math.sqrt(var) / mean)


def pearson(xs: Sequence[float], ys: Sequence[float], weights: Sequence[float] | None = None) -> float:
    """Product-moment correlation; raises on constant input instead of returning nan."""
    x, y = _as_array(xs), _as_array(ys)
    if x.shape != y.shape:
        raise MetricsError("series lengths differ")
    if x.size < 2:
        raise MetricsError("need at least two points")
    w = np.ones_like(x) if weights is None else _as_array(weights)
    if w.shape != x.shape or w.sum() <= 0:
        raise MetricsError("weights must match values and have a positive sum")
    dx = x - np.average(x, weights=w)
    dy = y - np.average(y, weights=w)
    sxx = float(np.sum(w * dx * dx))
    syy = float(np.sum(w * dy * dy))
    if sxx == 0 or syy == 0:
        raise MetricsError("correlation undefined for a constant series")
    r = float(np.sum(w * dx * dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def quantile_partition(
    records: Sequence[T],
    key: Callable[[T], float],
    q: int,
    tiebreak: Callable[[T], str] = lambda r: r.zip_code,
) -> list[list[T]]:
    """Split records into ``q`` groups of near-equal size by ascending key.

    Ties are broken by ``tiebreak`` (ZIP code by default) so every record
    lands in exactly one group; the first ``len % q`` groups get the extra
    record.
    """
    if q < 2:
        raise MetricsError("q must be at least 2")
    if q > len(records):
        raise MetricsError(f"cannot split {len(records)} records into {q} groups")
    ordered = sorted(records, key=lambda r: (key(r), tiebreak(r)))
    base, extra = divmod(len(ordered), q)
    groups, start = [], 0
    for i in range(q):
        size = base + (1 if i < extra else 0)
        groups.append(ordered[start:start + size])
        start += size
    return groups


def polyfit_lse(points: Sequence[tuple[float, float]], degree: int, quantile_index: int = 0) -> FitResult:
    """Least-squares polynomial fit (coefficients in ascending degree)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    if degree < 0:
        raise MetricsError("degree must be nonnegative")
    if len(x) <= degree:
        raise MetricsError(f"need more than {degree} points for a degree-{degree} fit")
    # scale x for conditioning; coefficients are mapped back afterwards
    span = float(np.max(np.abs(x))) or 1.0
    design = np.vander(x / span, degree + 1, increasing=True)
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < degree + 1:
        raise MetricsError("rank-deficient design matrix (too few distinct x values)")
    coef = coef / span ** np.arange(degree + 1)
    try:
        r = pearson(x, y)
    except MetricsError:
        r = None
    return FitResult(quantile_index, tuple(float(c) for c in coef), r, len(x))


def quantile_fits(
    dataset: Dataset,
    x_key: str = "carbon_offset_total",
    y_key: str = "existing_installs",
    partition_key: str | None = None,
    q: int = 4,
    degree: int = 2,
) -> list[FitResult]:
    """Partition ZIPs by quantiles of ``partition_key`` and fit ``y`` on ``x`` in each."""
    partition_key = partition_key or x_key
    usable = [z for z in dataset.zips if all(z.get(k) is not None for k in (x_key, y_key, partition_key))]
    groups = quantile_partition(usable, key=lambda z: z.get(partition_key), q=q)
    return [
        polyfit_lse([(z.get(x_key), z.get(y_key)) for z in group], degree, quantile_index=i)
        for i, group in enumerate(groups)
    ]


def _split_value(values: np.ndarray, rule: str | float | None) -> float:
    if rule is None or rule == "mean":
        return float(values.mean())
    if rule == "median":
        return float(np.median(values))
    return float(rule)


def quadrant_stats(
    metrics: Sequence[PerPanelMetrics] | Sequence[Mapping[str, float]],
    x_key: str = "carbon_per_panel",
    y_key: str = "energy_per_panel",
    x_split: str | float | None = "mean",
    y_split: str | float | None = "mean",
) -> QuadrantShares:
    """Share of records in each quadrant around the two split values.

    A split may be a number or the name of a rule (``"mean"``, ``"median"``).
    Records sitting exactly on a split count toward the upper / right side.
    """
    if not metrics:
        raise MetricsError("quadrant statistics of an empty collection")
    get = (lambda m, k: m[k]) if isinstance(metrics[0], Mapping) else getattr
    x = np.array([get(m, x_key) for m in metrics], dtype=float)
    y = np.array([get(m, y_key) for m in metrics], dtype=float)
    xs, ys = _split_value(x, x_split), _split_value(y, y_split)
    right, top = x >= xs, y >= ys
    n = len(x)
    return QuadrantShares(
        top_right=int(np.sum(right & top)) / n,
        top_left=int(np.sum(~right & top)) / n,
        bottom_left=int(np.sum(~right & ~top)) / n,
        bottom_right=int(np.sum(right & ~top)) / n,
        x_split=xs,
        y_split=ys,
        n=n,
    )


def summary_statistics(dataset: Dataset, weighted: bool = False) -> dict:
    """Dispersion and correlation of per-panel energy and carbon offset.

    ``weighted`` weights each ZIP by its viable panel count.
    """
    table, excluded = per_panel_table(dataset)
    energy = np.array([m.energy_per_panel for m in table])
    carbon = np.array([m.carbon_per_panel for m in table])
    w = None
    if weighted:
        w = np.array([z.potential_installs for z in dataset.zips if z.potential_installs > 0])
    return {
        "n_zips": len(table),
        "excluded_no_potential": excluded,
        "weighting": "panels" if weighted else "unit",
        "cov_energy_per_panel": coefficient_of_variation(energy, w),
        "cov_carbon_per_panel": coefficient_of_variation(carbon, w),
        "pearson_energy_carbon": pearson(energy, carbon, w),
    }
