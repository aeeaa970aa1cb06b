"""Seeded synthetic input tables with a tunable correlation structure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sitegrid.dataset import (
    ACS_FIELDS,
    DEFAULT_MIN_POPULATION,
    SUNROOF_FIELDS,
    VOTE_FIELDS,
    Dataset,
    RawRow,
    RawTable,
    aggregate_states,
    clean_join,
)

FUELS = ("coal", "gas", "hydro", "nuclear", "other", "solar", "wind")
_STATE_POOL = (
    "AL", "AZ", "CA", "CO", "FL", "GA", "IL", "IN", "KY", "LA", "MA", "MI", "MN", "MO",
    "NC", "NJ", "NM", "NV", "NY", "OH", "PA", "SC", "TN", "TX", "UT", "VA", "WA", "WI", "WV", "WY",
)


@dataclass(frozen=True)
class SynthProfile:
    """Generator knobs.

    ``carbon_adoption`` couples adoption to carbon offset per panel (negative
    values reproduce the under-served high-offset ZIPs); ``black_adoption`` and
    ``income_adoption`` do the same for demographics.
    """

    carbon_adoption: float = -1.2
    black_adoption: float = -0.6
    income_adoption: float = 0.5
    energy_adoption: float = 0.4
    mean_realized: float = 0.03
    potential_sigma: float = 0.5


PROFILES = {
    "anti-correlated": SynthProfile(),
    "independent": SynthProfile(0.0, 0.0, 0.0, 0.0),
    "equitable": SynthProfile(0.0, 0.0, 0.0, 0.4),
}


@dataclass(frozen=True)
class SynthTables:
    sunroof: RawTable
    acs: RawTable
    voting: RawTable
    energy_mix: RawTable


def _table(rows: list[dict]) -> RawTable:
    return RawTable(None, tuple(RawRow(i + 2, r) for i, r in enumerate(rows)))


def _zscore(x: np.ndarray) -> np.ndarray:
    sd = x.std()
    return (x - x.mean()) / sd if sd > 0 else np.zeros_like(x)


def synth_tables(seed: int, n_zips: int, profile: str | SynthProfile = "anti-correlated") -> SynthTables:
    """Raw Sunroof/ACS/voting/energy-mix rows that clean without any drops."""
    if n_zips < 1:
        raise ValueError("n_zips must be at least 1")
    if isinstance(profile, str):
        try:
            profile = PROFILES[profile]
        except KeyError:
            raise ValueError(f"unknown synth profile {profile!r}; choose from {sorted(PROFILES)}") from None
    rng = np.random.default_rng(seed)

    n_states = int(min(len(_STATE_POOL), max(1, round(np.sqrt(n_zips) / 2))))
    states = sorted(rng.choice(_STATE_POOL, size=n_states, replace=False).tolist())
    sun = rng.uniform(360.0, 540.0, n_states)
    intensity = rng.uniform(0.15, 0.75, n_states)  # kg CO2 per kWh
    black_base = rng.uniform(0.03, 0.35, n_states)
    income_base = rng.uniform(50_000, 90_000, n_states)

    codes = np.sort(rng.choice(np.arange(1001, 99_999), size=n_zips, replace=False))
    st = rng.integers(0, n_states, n_zips)

    energy_pp = np.clip(sun[st] * (1 + 0.05 * rng.standard_normal(n_zips)), 250.0, 600.0)
    carbon_pp = energy_pp * intensity[st] * (1 + 0.1 * rng.standard_normal(n_zips))
    carbon_pp = np.clip(carbon_pp, 20.0, None)

    black = np.clip(rng.beta(2.0, 2.0 / black_base[st] - 2.0 + 1e-9), 0.0, 0.95)
    rest = 1.0 - black
    split = rng.dirichlet([6.0, 1.0, 1.5, 0.5], n_zips)
    white, asian, hispanic = rest * split[:, 0], rest * split[:, 1], rest * split[:, 2]
    income = income_base[st] * np.exp(0.3 * rng.standard_normal(n_zips) - 0.8 * (black - black.mean()))

    potential = np.maximum(1, np.round(np.exp(7.5 + profile.potential_sigma * rng.standard_normal(n_zips))))
    logit = (
        np.log(profile.mean_realized / (1 - profile.mean_realized))
        + profile.carbon_adoption * _zscore(carbon_pp)
        + profile.black_adoption * _zscore(black)
        + profile.income_adoption * _zscore(np.log(income))
        + profile.energy_adoption * _zscore(energy_pp)
        + 0.3 * rng.standard_normal(n_zips)
    )
    realized = 1.0 / (1.0 + np.exp(-logit))
    existing = rng.binomial(potential.astype(np.int64), realized).astype(float)
    covered = np.round(rng.uniform(40.0, 100.0, n_zips), 2)
    population = np.maximum(DEFAULT_MIN_POPULATION + 100, np.round(np.exp(9.5 + 0.6 * rng.standard_normal(n_zips))))

    sunroof_rows, acs_rows = [], []
    for i in range(n_zips):
        code = f"{codes[i]:05d}"
        sunroof_rows.append(
            dict(zip(SUNROOF_FIELDS, (
                code,
                states[st[i]],
                float(existing[i]),
                float(potential[i]),
                float(energy_pp[i] * potential[i]),
                float(carbon_pp[i] * potential[i]),
                float(covered[i]),
            )))
        )
        acs_rows.append(
            dict(zip(ACS_FIELDS, (
                code,
                float(np.round(income[i])),
                float(population[i]),
                float(black[i]),
                float(white[i]),
                float(asian[i]),
                float(hispanic[i]),
            )))
        )

    voting_rows, mix_rows = [], []
    for k, code in enumerate(states):
        rep = float(rng.uniform(0.3, 0.65))
        dem = float((1.0 - rep) * rng.uniform(0.93, 0.99))
        voting_rows.append(dict(zip(("state_code",) + VOTE_FIELDS, (code, rep, dem))))
        # fossil share tracks the grid intensity drawn above
        fossil = intensity[k] / 0.8
        weights = rng.dirichlet(np.ones(len(FUELS)))
        shares = {f: float(w) for f, w in zip(FUELS, weights)}
        total_fossil = shares["coal"] + shares["gas"]
        for f in FUELS:
            if f in ("coal", "gas"):
                value = fossil * shares[f] / total_fossil
            else:
                value = (1 - fossil) * shares[f] / (1 - total_fossil)
            mix_rows.append({"state_code": code, "fuel": f, "generation": round(float(100.0 * value), 6)})

    return SynthTables(_table(sunroof_rows), _table(acs_rows), _table(voting_rows), _table(mix_rows))


def synth_dataset(seed: int, n_zips: int, profile: str | SynthProfile = "anti-correlated") -> Dataset:
    """Cleaned, state-aggregated synthetic dataset; deterministic in ``seed``."""
    tables = synth_tables(seed, n_zips, profile)
    ds = clean_join(tables.sunroof, tables.acs)
    ds = aggregate_states(ds, tables.voting, tables.energy_mix)
    provenance = dict(ds.provenance)
    provenance["synthetic"] = {
        "seed": seed,
        "n_zips": n_zips,
        "profile": profile if isinstance(profile, str) else repr(profile),
    }
    return Dataset(ds.zips, ds.states, provenance)
