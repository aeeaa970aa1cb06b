from __future__ import annotations

import time

import pytest

from sitegrid.dataset import Dataset, ZipRecord, aggregate_states
from sitegrid.synth import synth_dataset

ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []
SESSION_START = time.perf_counter()


def make_zip(code, existing, potential, energy_pp=400.0, carbon_pp=100.0, state="AA", **kw) -> ZipRecord:
    return ZipRecord(
        zip_code=code,
        state_code=state,
        existing_installs=float(existing),
        potential_installs=float(potential),
        energy_potential_total=float(energy_pp * potential),
        carbon_offset_total=float(carbon_pp * potential),
        percent_covered=100.0,
        **kw,
    )


def make_dataset(*zips: ZipRecord, states: bool = False) -> Dataset:
    ds = Dataset(zips=tuple(sorted(zips, key=lambda z: z.zip_code)))
    return aggregate_states(ds) if states else ds


@pytest.fixture
def three_zip() -> Dataset:
    """A(cap 3, 10 kg/panel), B(cap 2, 20 kg/panel), C(cap 5, 15 kg/panel)."""
    return make_dataset(
        make_zip("00001", 1, 4, energy_pp=500, carbon_pp=10, race_share_black=0.1, median_income=90_000.0),
        make_zip("00002", 2, 4, energy_pp=300, carbon_pp=20, race_share_black=0.5, median_income=40_000.0),
        make_zip("00003", 1, 6, energy_pp=400, carbon_pp=15, race_share_black=0.3, median_income=60_000.0),
    )


@pytest.fixture(scope="session")
def synth_500() -> Dataset:
    return synth_dataset(1, 500)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for criterion, status, detail in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"{status:4s}  {criterion}  {detail}")
        elapsed = time.perf_counter() - SESSION_START
        terminalreporter.write_line(f"{'PASS' if elapsed < 60 else 'FAIL':4s}  full test session runtime  {elapsed:.1f} s")
