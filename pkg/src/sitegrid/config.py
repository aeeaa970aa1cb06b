"""Run configuration: one JSON document plus command-line overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from sitegrid.dataset import DEFAULT_MIN_POPULATION, SCHEMA_PRESETS, Schema
from sitegrid.equity import SplitSpec, default_split_specs
from sitegrid.projection import DEFAULT_GRID, DEFAULT_MULTIPLIERS, ProjectionConfig
from sitegrid.strategies import BUILTIN_STRATEGIES, DEFAULT_ROSTER, Strategy, check_attribute


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class InputSpec:
    path: str
    schema: Schema

    @classmethod
    def from_value(cls, value: Any, default_schema: str, base: Path) -> "InputSpec":
        if isinstance(value, str):
            value = {"path": value}
        schema = value.get("schema", default_schema)
        if isinstance(schema, str):
            try:
                schema = SCHEMA_PRESETS[schema]
            except KeyError:
                raise ConfigError(f"unknown schema preset {schema!r}") from None
        else:
            preset = SCHEMA_PRESETS[default_schema]
            schema = Schema(
                columns={**preset.columns, **schema.get("columns", {})},
                required=tuple(schema.get("required", preset.required)),
                scale={**preset.scale, **schema.get("scale", {})},
                coverage_scaled=bool(schema.get("coverage_scaled", preset.coverage_scaled)),
            )
        path = Path(value["path"])
        if not path.is_absolute():
            path = base / path
        return cls(os.path.normpath(path), schema)


def parse_grid(text: str) -> tuple[int, ...]:
    """``start:step:end`` (inclusive) to a budget tuple."""
    try:
        start, step, end = (int(float(p)) for p in text.split(":"))
    except ValueError:
        raise ConfigError(f"grid must look like start:step:end, got {text!r}") from None
    if step <= 0 or end < start:
        raise ConfigError(f"bad grid {text!r}")
    return tuple(range(start, end + 1, step))


@dataclass(frozen=True)
class RunConfig:
    inputs: Mapping[str, InputSpec] = field(default_factory=dict)
    out: str = "out"
    data_dir: str | None = None
    seed: int = 1
    min_population: float = DEFAULT_MIN_POPULATION
    # analysis
    granularity: str = "zip"
    weighting: str = "unit"
    quadrant_split: str = "mean"
    quantiles: int = 4
    fit_degree: int = 2
    fit_x: str = "carbon_offset_total"
    fit_y: str = "existing_installs"
    splits: tuple[SplitSpec, ...] | None = None
    # projection
    strategies: tuple[Strategy, ...] = DEFAULT_ROSTER
    grid: tuple[int, ...] = DEFAULT_GRID
    multipliers: tuple[float, ...] = DEFAULT_MULTIPLIERS
    baseline: str = "status_quo"
    equity_strategy: str = "round_robin"
    workers: int = 1
    # synth
    n_zips: int = 500
    profile: str = "anti-correlated"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        paths = [spec.path for spec in self.inputs.values()]
        if len(set(paths)) != len(paths):
            raise ConfigError("input paths must be distinct")
        if self.quantiles < 2:
            raise ConfigError("quantiles must be at least 2")
        if self.fit_degree < 1:
            raise ConfigError("fit degree must be at least 1")
        if self.granularity not in ("zip", "state"):
            raise ConfigError(f"granularity must be zip or state, got {self.granularity!r}")
        if self.weighting not in ("unit", "population"):
            raise ConfigError(f"weighting must be unit or population, got {self.weighting!r}")
        for a in (self.fit_x, self.fit_y):
            check_attribute(a)
        for s in self.strategies:
            for a in s.attributes():
                check_attribute(a)

    @property
    def dataset_dir(self) -> Path:
        return Path(self.data_dir or self.out)

    def split_specs(self) -> list[SplitSpec]:
        if self.splits is None:
            return default_split_specs(self.granularity)
        return [replace(s, granularity=self.granularity) for s in self.splits]

    def projection_config(self) -> ProjectionConfig:
        return ProjectionConfig(self.grid, self.strategies, self.multipliers)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base: str | os.PathLike = ".") -> "RunConfig":
        base = Path(base)
        kw: dict[str, Any] = {}
        defaults = {"sunroof": "sunroof", "acs": "acs", "voting": "voting", "energy_mix": "energy_mix"}
        inputs = {}
        for key, value in (data.get("inputs") or {}).items():
            if key not in defaults:
                raise ConfigError(f"unknown input {key!r}")
            inputs[key] = InputSpec.from_value(value, defaults[key], base)
        kw["inputs"] = inputs
        for key in ("out", "data_dir"):
            if key in data:
                p = Path(data[key])
                kw[key] = os.path.normpath(p if p.is_absolute() else base / p)
        for key in ("seed", "min_population", "n_zips", "profile", "workers"):
            if key in data:
                kw[key] = data[key]

        analysis = data.get("analysis", {})
        for key in ("granularity", "weighting", "quadrant_split", "quantiles", "fit_degree", "fit_x", "fit_y"):
            if key in analysis:
                kw[key] = analysis[key]
        if "splits" in analysis:
            kw["splits"] = tuple(
                SplitSpec(s["attribute"], s.get("direction", "above"), analysis.get("granularity", "zip"))
                for s in analysis["splits"]
            )

        if "strategies" in data:
            roster = []
            for s in data["strategies"]:
                if isinstance(s, str):
                    if s not in BUILTIN_STRATEGIES:
                        raise ConfigError(f"unknown built-in strategy {s!r}")
                    roster.append(BUILTIN_STRATEGIES[s])
                else:
                    roster.append(Strategy.from_dict(s))
            kw["strategies"] = tuple(roster)
        projection = data.get("projection", {})
        if "grid" in projection:
            grid = projection["grid"]
            kw["grid"] = parse_grid(grid) if isinstance(grid, str) else tuple(int(n) for n in grid)
        if "multipliers" in projection:
            kw["multipliers"] = tuple(float(m) for m in projection["multipliers"])
        for key in ("baseline", "equity_strategy"):
            if key in projection:
                kw[key] = projection[key]
        return cls(**kw)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data, base=path.parent)

    def select_strategies(self, names: list[str]) -> "RunConfig":
        roster = {s.name: s for s in self.strategies}
        picked = []
        for name in names:
            if name in roster:
                picked.append(roster[name])
            elif name in BUILTIN_STRATEGIES:
                picked.append(BUILTIN_STRATEGIES[name])
            else:
                raise ConfigError(f"unknown strategy {name!r}")
        return replace(self, strategies=tuple(picked))
