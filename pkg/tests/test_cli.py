import csv
import json

import pytest

from maslov_brake.cli import main
from maslov_brake.config import RunConfig
from maslov_brake.errors import ConfigError


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_config_rejects_unknown_and_bad_fields(tmp_path):
    with pytest.raises(ConfigError, match="unknown field"):
        RunConfig.from_dict({"task": "index", "normal_form": ["R", 2.0], "colour": 1})
    with pytest.raises(ConfigError, match="tolerance"):
        RunConfig.from_dict({"task": "verify", "hamiltonian": "quartic-first-order", "tau": 2.0, "tolerances": {"speed": 1}})
    with pytest.raises(ConfigError, match="'k'"):
        RunConfig.from_dict({"task": "bott", "normal_form": ["R", 2.0]})
    with pytest.raises(ConfigError, match="'seed'"):
        RunConfig.from_dict({"task": "index", "normal_form": ["R", 2.0], "seed": -1})
    bad = tmp_path / "bad.json"
    bad.write_text('{"task": "index",\n "seed": }')
    with pytest.raises(ConfigError, match="line 2"):
        RunConfig.load(bad)


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["index", "--config", str(bad)]) == 2
    assert main(["nonsense"]) == 2
    assert main(["bott", "--normal-form", "R", "2.0", "--out", str(tmp_path / "o")]) == 2
    assert main(["verify", "--hamiltonian", "quartic-plus-B", "--tau", "7.0", "--out", str(tmp_path / "g")]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"task": "index", "normal_form": ["R", 2.0]}))
    assert main(["bott", "--config", str(cfg), "--k", "2"]) == 2


def test_index_normal_form(tmp_path):
    out = tmp_path / "idx"
    assert main(["index", "--normal-form", "R", "4.0", "--out", str(out)]) == 0
    payload = json.loads((out / "index.json").read_text())
    assert payload["status"] == "pass"
    assert (out / "metadata.json").exists() and (out / "index.txt").exists()


def test_bott_corpus_all_equal(tmp_path):
    out = tmp_path / "bott"
    assert main(["bott", "--n", "2", "--k", "3", "--count", "25", "--seed", "1", "--out", str(out)]) == 0
    rows = read_csv(out / "bott_summary.csv")
    assert rows[0][-1] == "verdict"
    assert len(rows) == 26 and all(r[-1] == "equal" for r in rows[1:])


def test_solve_outputs(tmp_path):
    out = tmp_path / "solve"
    assert main(["solve", "--hamiltonian", "quartic-first-order", "--tau", "2.0", "--out", str(out)]) == 0
    payload = json.loads((out / "solve.json").read_text())
    assert payload["certificates"][0]["passed"]
    orbit = read_csv(out / "solve_orbit_tau2.csv")
    assert orbit[0] == ["t", "z1", "z2"] and len(orbit) == 202
    hess = read_csv(out / "solve_hessian_tau2.csv")
    assert hess[0] == ["index", "eigenvalue"]


def test_relindex_scan_columns(tmp_path):
    out = tmp_path / "scan"
    assert main(["relindex", "--normal-form", "R", "2.0", "--scan", "0.1:3.1:31", "--out", str(out)]) == 0
    rows = read_csv(out / "relindex_scan.csv")
    assert rows[0] == ["theta", "i", "nu"] and len(rows) == 32
    assert main(["relindex", "--normal-form", "R", "2.0", "--scan", "0:3.0:31", "--out", str(out)]) == 2


def test_config_file_and_flags_merge(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"task": "iterate", "schema_version": 1, "normal_form": ["N1", 1, 1], "k": [2]}))
    out = tmp_path / "it"
    assert main(["iterate", "--config", str(cfg), "--k", "2", "3", "--out", str(out)]) == 0
    payload = json.loads((out / "iterate.json").read_text())
    assert payload["config"]["k"] == [2, 3]


def test_runs_are_deterministic(tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["bott", "--n", "1", "--k", "2", "3", "--count", "6", "--seed", "5", "--out", str(o), "--workers", "2"]) == 0
    names = sorted(p.name for p in outs[0].iterdir() if p.name != "metadata.json")
    assert names == sorted(p.name for p in outs[1].iterdir() if p.name != "metadata.json")
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
