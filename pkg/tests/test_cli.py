import csv
import json

import pytest

from sitegrid.cli import main
from sitegrid.config import ConfigError, RunConfig, parse_grid


def run(*argv):
    return main([str(a) for a in argv])


def snapshot(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("run")
    assert run("synth", "--out", root / "data", "--seed", 3, "--n-zips", 400) == 0
    assert run("ingest", "--config", root / "data" / "inputs" / "config.json", "--out", root / "ingested") == 0
    cfg = root / "cfg.json"
    cfg.write_text(json.dumps({"data_dir": "data", "out": "out"}))
    assert run("analyze", "--config", cfg) == 0
    assert run("project", "--config", cfg, "--grid", "0:100000:1800000") == 0
    return root


def test_ingest_reproduces_synth_outputs(pipeline):
    for name in ("data_by_zip.csv", "data_by_state.csv"):
        assert (pipeline / "data" / name).read_bytes() == (pipeline / "ingested" / name).read_bytes()


def test_expected_outputs_exist(pipeline):
    out = pipeline / "out"
    for name in (
        "metrics_by_zip.csv", "summary.json", "fits.json", "equity_report.json", "equity_report_bars.csv",
        "projection_energy.csv", "projection_carbon.csv", "markers.json", "comparison.csv", "crossover.json",
        "placements_round_robin_1800000.csv", "equity_pre.json", "equity_post_round_robin.json",
    ):
        assert (out / name).is_file(), name


def test_projection_csv_shape(pipeline):
    with open(pipeline / "out" / "projection_carbon.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6 * 19
    names = {r["strategy"] for r in rows}
    assert len(names) == 6
    for name in names:
        vals = [float(r["value"]) for r in rows if r["strategy"] == name]
        assert vals == sorted(vals) and vals[0] == 0.0


def test_rerun_is_byte_identical(pipeline, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"data_dir": str(pipeline / "data"), "out": "again"}))
    assert run("analyze", "--config", cfg) == 0
    assert run("project", "--config", cfg, "--grid", "0:100000:1800000") == 0
    assert snapshot(tmp_path / "again") == snapshot(pipeline / "out")


def test_synth_is_deterministic(tmp_path):
    run("synth", "--out", tmp_path / "a", "--seed", 5, "--n-zips", 100)
    run("synth", "--out", tmp_path / "b", "--seed", 5, "--n-zips", 100)
    a, b = snapshot(tmp_path / "a"), snapshot(tmp_path / "b")
    a.pop("provenance.json"); b.pop("provenance.json")
    assert a == b


def test_anti_correlated_profile(pipeline):
    summary = json.loads((pipeline / "out" / "summary.json").read_text())
    assert summary["unweighted"]["n_zips"] == 400
    with open(pipeline / "data" / "data_by_zip.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    from sitegrid.metrics import pearson

    carbon = [float(r["carbon_offset_total"]) / float(r["potential_installs"]) for r in rows]
    existing = [float(r["existing_installs"]) for r in rows]
    assert pearson(carbon, existing) < 0


def test_missing_input_fails_cleanly(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"inputs": {"sunroof": "nope.csv", "acs": "nope2.csv"}, "out": "out"}))
    assert run("ingest", "--config", cfg) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and "nope.csv" in err[0]
    assert not (tmp_path / "out").exists()


def test_unknown_split_attribute(tmp_path, pipeline, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"data_dir": str(pipeline / "data"), "out": "out",
                               "analysis": {"splits": [{"attribute": "shoe_size"}]}}))
    assert run("analyze", "--config", cfg) == 1
    assert "shoe_size" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_baseline_not_in_roster(tmp_path, pipeline, capsys):
    assert run("project", "--out", tmp_path / "out", "--strategies", "carbon_efficient,round_robin",
               "--baseline", "status_quo", "--grid", "0:1000:2000") == 1
    assert "status_quo" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_missing_dataset_dir(tmp_path, capsys):
    assert run("analyze", "--out", tmp_path / "empty") == 1
    assert "data_by_zip.csv" in capsys.readouterr().err


def test_bad_grid(tmp_path):
    assert run("project", "--out", tmp_path, "--grid", "0:-5:10") == 1


def test_parse_grid():
    assert parse_grid("0:100000:1800000")[-1] == 1_800_000
    assert len(parse_grid("0:100000:1800000")) == 19
    with pytest.raises(ConfigError):
        parse_grid("1,2,3")


def test_config_custom_strategy(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "strategies": ["status_quo", {"name": "mix", "kind": "weighted",
                                      "weights": {"carbon_per_panel": 1, "median_income": 1},
                                      "ascending": ["median_income"]}],
        "projection": {"grid": "0:10:20", "multipliers": [2]},
        "inputs": {"sunroof": {"path": "s.csv", "schema": "google_sunroof"}, "acs": "a.csv"},
    }))
    conf = RunConfig.load(cfg)
    assert [s.name for s in conf.strategies] == ["status_quo", "mix"]
    assert conf.grid == (0, 10, 20) and conf.multipliers == (2.0,)
    assert conf.inputs["sunroof"].path == str(tmp_path / "s.csv")


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        RunConfig.load(bad)
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"strategies": ["not_builtin"]})
    with pytest.raises(ConfigError):
        RunConfig(granularity="county")
