"""
ZIP- and state-level dataset ingestion.

Raw tables (a Sunroof-shaped ZIP file, an ACS-shaped ZIP file and the
optional state voting / generation-mix overlays) are parsed through a
column mapping, joined on ZIP code, corrected for imaging coverage and
aggregated to states.  Everything downstream works on the immutable
:class:`Dataset` produced here.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from sitegrid.io import write_csv, write_json

log = logging.getLogger(__name__)

DEFAULT_MIN_POPULATION = 100

RACE_FIELDS = ("race_share_black", "race_share_white", "race_share_asian", "race_share_hispanic")
VOTE_FIELDS = ("republican_vote_share", "democratic_vote_share")
SUNROOF_FIELDS = (
    "zip_code",
    "state_code",
    "existing_installs",
    "potential_installs",
    "energy_potential_total",
    "carbon_offset_total",
    "percent_covered",
)
ACS_FIELDS = ("zip_code", "median_income", "population") + RACE_FIELDS
STRING_FIELDS = frozenset({"zip_code", "state_code", "fuel"})

# numeric ZipRecord fields, in canonical column order
ZIP_NUMERIC_FIELDS = (
    "existing_installs",
    "potential_installs",
    "energy_potential_total",
    "carbon_offset_total",
    "percent_covered",
    "median_income",
    "population",
) + RACE_FIELDS + VOTE_FIELDS
DERIVED_FIELDS = ("energy_per_panel", "carbon_per_panel", "realized_potential")
STATE_MEAN_FIELDS = tuple(f for f in ZIP_NUMERIC_FIELDS if f not in VOTE_FIELDS) + DERIVED_FIELDS

ZIP_COLUMNS = ("zip_code", "state_code") + ZIP_NUMERIC_FIELDS

US_STATES = {
    "Alabama": "AL", "Alaska": "AK", "Arizona": "AZ", "Arkansas": "AR", "California": "CA",
    "Colorado": "CO", "Connecticut": "CT", "Delaware": "DE", "District of Columbia": "DC",
    "Florida": "FL", "Georgia": "GA", "Hawaii": "HI", "Idaho": "ID", "Illinois": "IL",
    "Indiana": "IN", "Iowa": "IA", "Kansas": "KS", "Kentucky": "KY", "Louisiana": "LA",
    "Maine": "ME", "Maryland": "MD", "Massachusetts": "MA", "Michigan": "MI", "Minnesota": "MN",
    "Mississippi": "MS", "Missouri": "MO", "Montana": "MT", "Nebraska": "NE", "Nevada": "NV",
    "New Hampshire": "NH", "New Jersey": "NJ", "New Mexico": "NM", "New York": "NY",
    "North Carolina": "NC", "North Dakota": "ND", "Ohio": "OH", "Oklahoma": "OK", "Oregon": "OR",
    "Pennsylvania": "PA", "Rhode Island": "RI", "South Carolina": "SC", "South Dakota": "SD",
    "Tennessee": "TN", "Texas": "TX", "Utah": "UT", "Vermont": "VT", "Virginia": "VA",
    "Washington": "WA", "West Virginia": "WV", "Wisconsin": "WI", "Wyoming": "WY",
}
_STATE_BY_NAME = {name.upper(): code for name, code in US_STATES.items()}


class DatasetError(Exception):
    """Base class for ingestion failures."""


class MissingFileError(DatasetError, FileNotFoundError):
    pass


class EmptyFileError(DatasetError):
    """The file has no header row."""


class MissingColumnError(DatasetError):
    pass


class CoverageError(DatasetError, ValueError):
    """percent_covered outside (0, 100]."""


class EmptyJoinError(DatasetError):
    """No record survived cleaning."""


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZipRecord:
    zip_code: str
    state_code: str
    existing_installs: float
    potential_installs: float
    energy_potential_total: float
    carbon_offset_total: float
    percent_covered: float
    median_income: float | None = None
    population: int | None = None
    race_share_black: float | None = None
    race_share_white: float | None = None
    race_share_asian: float | None = None
    race_share_hispanic: float | None = None
    republican_vote_share: float | None = None
    democratic_vote_share: float | None = None

    @property
    def energy_per_panel(self) -> float | None:
        if self.potential_installs > 0:
            return self.energy_potential_total / self.potential_installs
        return None

    @property
    def carbon_per_panel(self) -> float | None:
        if self.potential_installs > 0:
            return self.carbon_offset_total / self.potential_installs
        return None

    @property
    def realized_potential(self) -> float | None:
        if self.potential_installs > 0:
            return 100.0 * self.existing_installs / self.potential_installs
        return None

    def get(self, name: str) -> float | None:
        """Numeric attribute lookup by name, derived per-panel values included."""
        if name not in ZIP_NUMERIC_FIELDS and name not in DERIVED_FIELDS:
            raise KeyError(name)
        value = getattr(self, name)
        return None if value is None else float(value)


@dataclass(frozen=True)
class StateRecord:
    state_code: str
    zip_count: int
    means: Mapping[str, float | None]
    republican_vote_share: float | None = None
    democratic_vote_share: float | None = None
    generation_mix: Mapping[str, float] | None = None
    population_total: float | None = None

    def get(self, name: str) -> float | None:
        if name in VOTE_FIELDS:
            return getattr(self, name)
        if name in self.means:
            return self.means[name]
        raise KeyError(name)


@dataclass(frozen=True)
class Dataset:
    zips: tuple[ZipRecord, ...]
    states: tuple[StateRecord, ...] = ()
    provenance: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.zips)

    @cached_property
    def zip_codes(self) -> tuple[str, ...]:
        return tuple(z.zip_code for z in self.zips)

    @cached_property
    def zip_index(self) -> dict[str, int]:
        return {code: i for i, code in enumerate(self.zip_codes)}

    @cached_property
    def state_index(self) -> dict[str, StateRecord]:
        return {s.state_code: s for s in self.states}

    def column(self, name: str) -> np.ndarray:
        """Read-only float array of one attribute in ZIP order, ``nan`` where missing."""
        cache = self.__dict__.setdefault("_columns", {})
        if name not in cache:
            if name not in ZIP_NUMERIC_FIELDS and name not in DERIVED_FIELDS:
                raise KeyError(name)
            values = (getattr(z, name) for z in self.zips)
            arr = np.array([np.nan if v is None else float(v) for v in values], dtype=float)
            arr.flags.writeable = False
            cache[name] = arr
        return cache[name]

    def with_states(self, states: Sequence[StateRecord], zips: Sequence[ZipRecord] | None = None) -> "Dataset":
        return Dataset(
            zips=tuple(self.zips if zips is None else zips),
            states=tuple(states),
            provenance=self.provenance,
        )


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Schema:
    """Maps logical field names to CSV column names.

    ``scale`` holds unit multipliers applied after parsing (e.g. metric tons
    to kg).  ``coverage_scaled`` marks tables whose counts are already full-ZIP
    estimates, such as the canonical ``data_by_zip.csv``.
    """

    columns: Mapping[str, str]
    required: tuple[str, ...] = ()
    scale: Mapping[str, float] = field(default_factory=dict)
    coverage_scaled: bool = False

    @classmethod
    def identity(cls, names: Iterable[str], required: Iterable[str] = (), **kw) -> "Schema":
        names = tuple(names)
        return cls(columns={n: n for n in names}, required=tuple(required), **kw)


SUNROOF_SCHEMA = Schema.identity(SUNROOF_FIELDS, required=SUNROOF_FIELDS)
ACS_SCHEMA = Schema.identity(ACS_FIELDS, required=("zip_code", "population"))
# Column names of Google's public project-sunroof postal-code export.
GOOGLE_SUNROOF_SCHEMA = Schema(
    columns={
        "zip_code": "region_name",
        "state_code": "state_name",
        "existing_installs": "existing_installs_count",
        "potential_installs": "number_of_panels_total",
        "energy_potential_total": "yearly_sunlight_kwh_total",
        "carbon_offset_total": "carbon_offset_metric_tons",
        "percent_covered": "percent_covered",
    },
    required=SUNROOF_FIELDS,
    scale={"carbon_offset_total": 1000.0},
)
VOTING_SCHEMA = Schema.identity(("state_code",) + VOTE_FIELDS, required=("state_code",) + VOTE_FIELDS)
ENERGY_MIX_SCHEMA = Schema.identity(("state_code", "fuel", "generation"), required=("state_code", "fuel", "generation"))
CANONICAL_SUNROOF_SCHEMA = replace(SUNROOF_SCHEMA, coverage_scaled=True)

SCHEMA_PRESETS = {
    "sunroof": SUNROOF_SCHEMA,
    "google_sunroof": GOOGLE_SUNROOF_SCHEMA,
    "acs": ACS_SCHEMA,
    "voting": VOTING_SCHEMA,
    "energy_mix": ENERGY_MIX_SCHEMA,
    "canonical_sunroof": CANONICAL_SUNROOF_SCHEMA,
}


@dataclass(frozen=True)
class RawRow:
    line: int
    values: Mapping[str, Any]
    invalid: frozenset[str] = frozenset()


@dataclass(frozen=True)
class RawTable:
    path: str | None
    rows: tuple[RawRow, ...]
    coverage_scaled: bool = False

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def normalize_zip(text: str) -> str | None:
    text = text.strip()
    if text.endswith(".0"):
        text = text[:-2]
    if text.isdigit() and len(text) <= 5:
        return text.zfill(5)
    return None


def normalize_state(text: str) -> str | None:
    text = text.strip()
    if len(text) == 2 and text.isalpha():
        return text.upper()
    return _STATE_BY_NAME.get(text.upper())


def _convert(name: str, cell: str, scale: Mapping[str, float]) -> tuple[Any, bool]:
    """Return (value, ok).  Empty cells are missing (None) but not invalid."""
    cell = cell.strip()
    if cell == "":
        return None, True
    if name == "zip_code":
        value = normalize_zip(cell)
        return value, value is not None
    if name == "state_code":
        value = normalize_state(cell)
        return value, value is not None
    if name in STRING_FIELDS:
        return cell, True
    try:
        value = float(cell)
    except ValueError:
        return None, False
    if not math.isfinite(value):
        return None, False
    return value * scale.get(name, 1.0), True


def parse_zip_csv(path: str | os.PathLike, schema: Schema) -> RawTable:
    """Read a mapped CSV table into raw rows.

    Works for any of the input tables (ZIP files and state overlays).  A
    malformed cell is recorded in the row's ``invalid`` set rather than
    raising; a missing file, missing mapped column or a file without a
    header row raise distinct :class:`DatasetError` subclasses.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFileError(f"empty file (no header row): {path}") from None
        header = [h.strip() for h in header]
        positions = {}
        for name, column in schema.columns.items():
            if column not in header:
                raise MissingColumnError(f"{path}: missing column {column!r} (for {name})")
            positions[name] = header.index(column)
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells or all(not c.strip() for c in cells):
                continue
            values: dict[str, Any] = {}
            invalid = set()
            for name, pos in positions.items():
                cell = cells[pos] if pos < len(cells) else ""
                value, ok = _convert(name, cell, schema.scale)
                values[name] = value
                if not ok:
                    invalid.add(name)
            rows.append(RawRow(lineno, values, frozenset(invalid)))
    return RawTable(str(path), tuple(rows), schema.coverage_scaled)


# ---------------------------------------------------------------------------
# Cleaning
# ---------------------------------------------------------------------------


def scale_by_coverage(raw_existing: float, raw_potential: float, percent_covered: float) -> tuple[float, float]:
    """Scale observed counts up to a full-ZIP estimate.

    >>> scale_by_coverage(50, 200, 50)
    (100.0, 400.0)
    """
    if not (0 < percent_covered <= 100):
        raise CoverageError(f"percent_covered must be in (0, 100], got {percent_covered!r}")
    factor = 100.0 / percent_covered
    return raw_existing * factor, raw_potential * factor


def _index_rows(table: RawTable, tally: Counter, side: str) -> dict[str, RawRow]:
    out: dict[str, RawRow] = {}
    for row in table:
        code = row.values.get("zip_code")
        if code is None or "zip_code" in row.invalid:
            tally[f"{side}:bad_zip_code"] += 1
        elif code in out:
            tally[f"{side}:duplicate_zip_code"] += 1
        else:
            out[code] = row
    return out


def _check_row(row: RawRow, required: Iterable[str]) -> str | None:
    for name in required:
        if name in row.invalid:
            return f"invalid:{name}"
        if row.values.get(name) is None:
            return f"missing:{name}"
    return None


def clean_join(
    sunroof: RawTable,
    acs: RawTable,
    *,
    min_population: float = DEFAULT_MIN_POPULATION,
    sunroof_required: Sequence[str] = SUNROOF_FIELDS,
    acs_required: Sequence[str] = ("zip_code", "population"),
) -> Dataset:
    """Join the Sunroof-shaped and ACS-shaped tables into cleaned ZIP records.

    Only ZIPs present in both tables survive, and only when every required
    field is valid and the population clears ``min_population``.  Counts and
    totals are coverage-scaled (unless the Sunroof table is already scaled),
    and existing installs above the potential are clamped down to it.
    """
    unkeyed: Counter = Counter()
    s_rows = _index_rows(sunroof, unkeyed, "sunroof")
    a_rows = _index_rows(acs, unkeyed, "acs")
    common = sorted(s_rows.keys() & a_rows.keys())

    drops: Counter = Counter()
    blanked: Counter = Counter()
    clamped = 0
    records = []
    for code in common:
        s, a = s_rows[code], a_rows[code]
        reason = _check_row(s, sunroof_required) or _check_row(a, acs_required)
        if reason is None:
            sv, av = s.values, a.values
            if not (0 < sv["percent_covered"] <= 100):
                reason = "bad_coverage"
            elif any(sv[f] < 0 for f in SUNROOF_FIELDS[2:6]):
                reason = "negative_count"
            elif av.get("population") is not None and av["population"] < 0:
                reason = "negative_count"
            elif av.get("population") is not None and av["population"] < min_population:
                reason = "low_population"
        if reason is not None:
            drops[reason] += 1
            continue

        optional = {}
        for name in ACS_FIELDS[1:] + tuple(n for n in VOTE_FIELDS if n in a.values):
            value = a.values.get(name)
            ok = name not in a.invalid
            if value is not None and name in RACE_FIELDS + VOTE_FIELDS and not 0 <= value <= 1:
                ok = False
            if value is not None and name == "median_income" and value <= 0:
                ok = False
            if not ok:
                blanked[name] += 1
                value = None
            optional[name] = value
        if optional.get("population") is not None:
            optional["population"] = int(round(optional["population"]))

        sv = s.values
        existing, potential = sv["existing_installs"], sv["potential_installs"]
        energy, carbon = sv["energy_potential_total"], sv["carbon_offset_total"]
        if not sunroof.coverage_scaled:
            existing, potential = scale_by_coverage(existing, potential, sv["percent_covered"])
            # totals describe the same imaged area as the counts
            factor = 100.0 / sv["percent_covered"]
            energy, carbon = energy * factor, carbon * factor
        if existing > potential:
            existing = potential
            clamped += 1
        records.append(
            ZipRecord(
                zip_code=code,
                state_code=sv["state_code"],
                existing_installs=float(existing),
                potential_installs=float(potential),
                energy_potential_total=float(energy),
                carbon_offset_total=float(carbon),
                percent_covered=float(sv["percent_covered"]),
                **optional,
            )
        )

    if not records:
        if drops:
            dominant = sorted(drops.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
            raise EmptyJoinError(f"no ZIP survived cleaning; dominant drop reason: {dominant}")
        raise EmptyJoinError("no ZIP survived cleaning; dominant drop reason: empty_intersection")

    provenance = {
        "sources": {"sunroof": sunroof.path, "acs": acs.path},
        "rows": {"sunroof": len(sunroof), "acs": len(acs)},
        "unkeyed": dict(sorted(unkeyed.items())),
        "sunroof_only": len(s_rows.keys() - a_rows.keys()),
        "acs_only": len(a_rows.keys() - s_rows.keys()),
        "intersection": len(common),
        "retained": len(records),
        "dropped": dict(sorted(drops.items())),
        "clamped": clamped,
        "blanked": dict(sorted(blanked.items())),
        "min_population": min_population,
    }
    return Dataset(zips=tuple(records), provenance=provenance)


# ---------------------------------------------------------------------------
# State aggregation
# ---------------------------------------------------------------------------


def _mean(values: Iterable[float | None]) -> tuple[float | None, int]:
    total = 0.0
    n = 0
    for v in values:
        if v is not None:
            total += v
            n += 1
    return (total / n if n else None), n


def _voting_by_state(rows: RawTable | None, known: set[str], notes: list[str]) -> dict[str, tuple[float, float]]:
    out: dict[str, tuple[float, float]] = {}
    for row in rows or ():
        code = row.values.get("state_code")
        if _check_row(row, VOTING_SCHEMA.required) is not None:
            notes.append(f"voting line {row.line}: invalid row skipped")
            continue
        if code not in known:
            notes.append(f"voting line {row.line}: unknown state {code} skipped")
            continue
        if code in out:
            notes.append(f"voting line {row.line}: duplicate state {code} skipped")
            continue
        rep, dem = row.values["republican_vote_share"], row.values["democratic_vote_share"]
        if not (0 <= rep <= 1 and 0 <= dem <= 1 and rep + dem <= 1 + 1e-12):
            notes.append(f"voting line {row.line}: shares out of range for {code} skipped")
            continue
        out[code] = (rep, dem)
    return out


def _mix_by_state(rows: RawTable | None, known: set[str], notes: list[str]) -> dict[str, dict[str, float]]:
    gen: dict[str, dict[str, float]] = {}
    for row in rows or ():
        code = row.values.get("state_code")
        if _check_row(row, ENERGY_MIX_SCHEMA.required) is not None or row.values["generation"] < 0:
            notes.append(f"energy-mix line {row.line}: invalid row skipped")
            continue
        if code not in known:
            notes.append(f"energy-mix line {row.line}: unknown state {code} skipped")
            continue
        fuels = gen.setdefault(code, {})
        fuels[row.values["fuel"]] = fuels.get(row.values["fuel"], 0.0) + float(row.values["generation"])
    out = {}
    for code, fuels in gen.items():
        total = sum(fuels[f] for f in sorted(fuels))
        if total <= 0:
            notes.append(f"energy-mix: zero total generation for {code} skipped")
            continue
        out[code] = {f: fuels[f] / total for f in sorted(fuels)}
    return out


def aggregate_states(
    dataset: Dataset,
    voting: RawTable | None = None,
    energy_mix: RawTable | None = None,
) -> Dataset:
    """Average ZIP records per state and attach the state overlays.

    Means are unweighted over member ZIPs, summed in ascending ZIP order and
    skip missing values field by field.  State vote shares are copied onto
    every member ZIP.
    """
    if not dataset.zips:
        raise DatasetError("cannot aggregate an empty dataset")
    members: dict[str, list[ZipRecord]] = {}
    for z in dataset.zips:
        members.setdefault(z.state_code, []).append(z)
    known = set(members)
    notes: list[str] = []
    votes = _voting_by_state(voting, known, notes)
    mixes = _mix_by_state(energy_mix, known, notes)
    for note in notes:
        log.warning(note)

    states = []
    for code in sorted(members):
        zs = members[code]
        means: dict[str, float | None] = {}
        for name in STATE_MEAN_FIELDS:
            means[name], _ = _mean(getattr(z, name) for z in zs)
        pops = [z.population for z in zs if z.population is not None]
        rep, dem = votes.get(code, (None, None))
        states.append(
            StateRecord(code, len(zs), means, rep, dem, mixes.get(code), float(sum(pops)) if pops else None)
        )

    zips = tuple(
        replace(z, republican_vote_share=votes[z.state_code][0], democratic_vote_share=votes[z.state_code][1])
        if z.state_code in votes
        else z
        for z in dataset.zips
    )
    provenance = dict(dataset.provenance)
    provenance["states"] = {
        "count": len(states),
        "voting_rows": len(voting) if voting is not None else None,
        "energy_mix_rows": len(energy_mix) if energy_mix is not None else None,
        "with_voting": len(votes),
        "with_energy_mix": len(mixes),
        "skipped_overlay_rows": notes,
    }
    if voting is not None or energy_mix is not None:
        provenance.setdefault("sources", {})
        provenance["sources"] = dict(provenance["sources"])
        provenance["sources"]["voting"] = voting.path if voting is not None else None
        provenance["sources"]["energy_mix"] = energy_mix.path if energy_mix is not None else None
    return Dataset(zips=zips, states=tuple(states), provenance=provenance)


# ---------------------------------------------------------------------------
# Canonical files
# ---------------------------------------------------------------------------


def zip_rows(dataset: Dataset) -> list[list[Any]]:
    return [[getattr(z, c) for c in ZIP_COLUMNS] for z in dataset.zips]


def state_columns(dataset: Dataset) -> list[str]:
    fuels = sorted({f for s in dataset.states for f in (s.generation_mix or {})})
    return (
        ["state_code", "zip_count", "population_total"]
        + [f"mean_{name}" for name in STATE_MEAN_FIELDS]
        + list(VOTE_FIELDS)
        + [f"mix_{fuel}" for fuel in fuels]
    )


def state_rows(dataset: Dataset) -> list[list[Any]]:
    header = state_columns(dataset)
    fuels = [h[4:] for h in header if h.startswith("mix_")]
    rows = []
    for s in dataset.states:
        mix = s.generation_mix or {}
        rows.append(
            [s.state_code, s.zip_count, s.population_total]
            + [s.means.get(name) for name in STATE_MEAN_FIELDS]
            + [s.republican_vote_share, s.democratic_vote_share]
            + [mix.get(f) if s.generation_mix is not None else None for f in fuels]
        )
    return rows


def write_dataset(dataset: Dataset, out_dir: str | os.PathLike) -> dict[str, Path]:
    """Write ``data_by_zip.csv``, ``data_by_state.csv`` and ``provenance.json``."""
    out_dir = Path(out_dir)
    return {
        "data_by_zip": write_csv(out_dir / "data_by_zip.csv", ZIP_COLUMNS, zip_rows(dataset)),
        "data_by_state": write_csv(out_dir / "data_by_state.csv", state_columns(dataset), state_rows(dataset)),
        "provenance": write_json(out_dir / "provenance.json", dict(dataset.provenance)),
    }


def _read_table(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    if not path.is_file():
        raise MissingFileError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyFileError(f"empty file (no header row): {path}")
        return list(reader.fieldnames), list(reader)


def _opt_float(cell: str) -> float | None:
    return float(cell) if cell.strip() else None


def read_dataset(directory: str | os.PathLike) -> Dataset:
    """Load the canonical cleaned files written by :func:`write_dataset`."""
    directory = Path(directory)
    header, rows = _read_table(directory / "data_by_zip.csv")
    missing = [c for c in ZIP_COLUMNS if c not in header]
    if missing:
        raise MissingColumnError(f"data_by_zip.csv: missing columns {missing}")
    zips = []
    for row in rows:
        kw: dict[str, Any] = {"zip_code": row["zip_code"], "state_code": row["state_code"]}
        for name in ZIP_NUMERIC_FIELDS:
            kw[name] = _opt_float(row[name])
        if kw["population"] is not None:
            kw["population"] = int(kw["population"])
        zips.append(ZipRecord(**kw))
    zips.sort(key=lambda z: z.zip_code)

    states = []
    state_path = directory / "data_by_state.csv"
    if state_path.is_file():
        header, rows = _read_table(state_path)
        for row in rows:
            means = {name: _opt_float(row.get(f"mean_{name}", "")) for name in STATE_MEAN_FIELDS}
            mix = {h[4:]: float(row[h]) for h in header if h.startswith("mix_") and row[h].strip()}
            states.append(
                StateRecord(
                    state_code=row["state_code"],
                    zip_count=int(row["zip_count"]),
                    means=means,
                    republican_vote_share=_opt_float(row["republican_vote_share"]),
                    democratic_vote_share=_opt_float(row["democratic_vote_share"]),
                    generation_mix=mix or None,
                    population_total=_opt_float(row["population_total"]),
                )
            )
    ds = Dataset(zips=tuple(zips), states=tuple(states))
    validate_dataset(ds)
    return ds


def validate_dataset(dataset: Dataset) -> None:
    """Check the ZipRecord / Dataset invariants, raising :class:`DatasetError`."""
    seen = set()
    for z in dataset.zips:
        if z.zip_code in seen:
            raise DatasetError(f"duplicate zip_code {z.zip_code}")
        seen.add(z.zip_code)
        if not (0 < z.percent_covered <= 100):
            raise DatasetError(f"{z.zip_code}: percent_covered out of range")
        if z.existing_installs < 0 or z.potential_installs < 0:
            raise DatasetError(f"{z.zip_code}: negative install count")
        if z.existing_installs > z.potential_installs:
            raise DatasetError(f"{z.zip_code}: existing_installs exceeds potential_installs")
        if z.energy_potential_total < 0 or z.carbon_offset_total < 0:
            raise DatasetError(f"{z.zip_code}: negative potential total")
    if dataset.states:
        codes = {s.state_code for s in dataset.states}
        orphans = sorted({z.state_code for z in dataset.zips} - codes)
        if orphans:
            raise DatasetError(f"ZIP records reference states without a state record: {orphans}")


def zip_record_fields() -> tuple[str, ...]:
    return tuple(f.name for f in fields(ZipRecord))
