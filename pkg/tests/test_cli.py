import json
import os
import subprocess
import sys

import numpy as np
import pytest

from emframes import cli
from emframes.core import QuadratureFailure
from emframes.cli import (EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_QUADRATURE, ConfigError,
                          ScenarioFile, encode, load_scenario, main, save_scenario,
                          write_atomic)


def _scenario(tmp_path, d, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def _run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


# ------------------------------------------------------------------ verify

def test_verify_kinematics(capsys):
    code, out = _run(["verify", "kinematics", "--seed", "3", "--trials", "20"], capsys)
    assert code == EXIT_OK
    rep = json.loads(out.out)
    assert rep["pass"] and rep["trials"] == 20
    assert all(k.startswith("kinematics.") for k in rep["identities"])


def test_verify_det_a_check_fails(capsys):
    code, out = _run(["verify", "stress", "--trials", "5", "--check", "detA"], capsys)
    assert code == EXIT_FAIL
    rep = json.loads(out.out)
    det = rep["identities"]["stress.detA"]
    assert not det["pass"]
    assert "19/432" in json.dumps(det) and "19/72" in json.dumps(det)
    others = [v["pass"] for k, v in rep["identities"].items() if k != "stress.detA"]
    assert all(others)


def test_verify_rejects_bad_trials(capsys):
    assert main(["verify", "fields", "--trials", "0"]) == EXIT_CONFIG
    assert main(["verify", "nope"]) == EXIT_CONFIG
    assert main(["verify", "fields", "--format", "csv"]) == EXIT_CONFIG


def test_verify_tolerance_override(capsys):
    code, out = _run(["verify", "kinematics", "--trials", "5", "--tol", "1e-300"], capsys)
    assert code == EXIT_FAIL
    assert {v["tol"] for v in json.loads(out.out)["identities"].values()} == {1e-300}


def test_verify_deterministic_out(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["verify", "all", "--seed", "7", "--trials", "10", "--out", str(p)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


# --------------------------------------------------------------- transform

def test_transform_empty_chain(tmp_path, capsys):
    s = _scenario(tmp_path, {"provider": {"kind": "constant", "E": [1, 2, 3], "B": [0, 0, 1]}})
    code, out = _run(["transform", s], capsys)
    assert code == EXIT_OK
    rep = json.loads(out.out)
    assert rep["before"] == rep["after"]
    assert np.allclose(np.array(rep["matrix"])[..., 0], np.eye(4))


def test_transform_boost(tmp_path, capsys):
    s = _scenario(tmp_path, {"provider": {"kind": "constant", "E": [0, 0, 0], "B": [0, 0, 1]},
                             "frames": [{"boost": {"velocity": [0.6, 0, 0]}}]})
    code, out = _run(["transform", s, "--at", "1,0,0,0"], capsys)
    assert code == EXIT_OK
    rep = json.loads(out.out)
    E = np.array(rep["after"]["E"])
    assert np.allclose(E[:, 0], [0, -0.75, 0]) and np.allclose(E[:, 1], 0)
    assert np.allclose(np.array(rep["after"]["B"])[:, 0], [0, 0, 1.25])
    assert np.allclose(np.array(rep["corresponding_point"])[:, 0], [1.25, 0, 0, -0.75])


def test_transform_limit(tmp_path, capsys):
    s = _scenario(tmp_path, {"provider": {"kind": "constant", "E": [1, 0, 0], "B": [0, 1, 0]},
                             "frames": [{"limit": {"direction": [1, 0, 0]}}]})
    code, out = _run(["transform", s], capsys)
    assert code == EXIT_OK
    L = np.array(json.loads(out.out)["matrix"])
    L = L[..., 0] + 1j * L[..., 1]
    assert np.allclose(L[0, 1], 1j) and np.allclose(L[1, 1], 0)


def test_transform_rejects_light_speed(tmp_path, capsys):
    s = _scenario(tmp_path, {"provider": {"kind": "crossed"},
                             "frames": [{"boost": {"velocity": [1, 0, 0]}}]})
    code, out = _run(["transform", s], capsys)
    assert code == EXIT_CONFIG and "error" in out.err


def test_transform_bad_input(tmp_path, capsys):
    assert main(["transform", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    s = _scenario(tmp_path, {"provider": {"kind": "crossed"}, "colour": 1})
    assert main(["transform", s]) == EXIT_CONFIG
    s = _scenario(tmp_path, {"provider": {"kind": "crossed"}})
    assert main(["transform", s, "--at", "1,2"]) == EXIT_CONFIG


# -------------------------------------------------------------------- scan

def test_scan_crossed_csv(tmp_path, capsys):
    s = _scenario(tmp_path, {"provider": {"kind": "crossed"}, "radii": [1, 2]})
    code, out = _run(["scan", s], capsys)
    assert code == EXIT_OK
    lines = out.out.splitlines()
    assert lines[0].startswith("r,volume_integral,surface_integral")
    assert all(abs(float(l.split(",")[2])) < 1e-8 for l in lines[1:])


def test_scan_polynomial_json(tmp_path, capsys):
    dB = np.zeros((3, 4))
    dB[0, 1], dB[1, 0] = 0.25, -0.25
    s = _scenario(tmp_path, {"provider": {"kind": "polynomial_jet", "E": [0, 0, 1],
                                          "dB": dB.tolist()}})
    code, out = _run(["scan", s, "--radii", "1,2", "--format", "json"], capsys)
    assert code == EXIT_OK
    rows = json.loads(out.out)["rows"]
    for row in rows:
        assert row["volume_integral"][0] == pytest.approx(0.5 * 4 / 3 * np.pi * row["r"] ** 3)


def test_scan_bad_radii(tmp_path):
    s = _scenario(tmp_path, {"provider": {"kind": "crossed"}})
    assert main(["scan", s]) == EXIT_CONFIG
    assert main(["scan", s, "--radii", "2,1"]) == EXIT_CONFIG
    assert main(["scan", s, "--radii", "a,b"]) == EXIT_CONFIG
    bad = _scenario(tmp_path, {"provider": {"kind": "crossed"}, "radii": [1, 1]}, "b.json")
    assert main(["scan", bad]) == EXIT_CONFIG


def test_scan_quadrature_failure_exit(tmp_path, monkeypatch, capsys):
    def fail(*a, **k):
        raise QuadratureFailure("boom", {"r": 1.0})
    monkeypatch.setattr(cli, "flux_scan", fail)
    s = _scenario(tmp_path, {"provider": {"kind": "crossed"}, "radii": [1]})
    code, out = _run(["scan", s], capsys)
    assert code == EXIT_QUADRATURE and "boom" in out.err


def test_scan_deterministic(tmp_path):
    s = _scenario(tmp_path, {"provider": {"kind": "plane_wave", "E0": [0, 0, 1], "k": 1.5},
                             "radii": [0.5, 1.0]})
    outs = [tmp_path / f"{i}.csv" for i in range(2)]
    for p in outs:
        assert main(["scan", s, "--out", str(p)]) == EXIT_OK
    assert outs[0].read_bytes() == outs[1].read_bytes()


# --------------------------------------------------------------- scenarios

def test_scenario_round_trip(tmp_path):
    d = {"constants": {"c": 2.0, "eps0": 0.5},
         "provider": {"kind": "constant", "E": [1, [0, 1], 0], "B": [0, 0, 1]},
         "frames": [{"boost": {"velocity": [0.5, 0, 0], "branch": "negated"}},
                    {"rotation": [[0, 1, 0], [-1, 0, 0], [0, 0, 1]]}],
         "t0": 0.5, "radii": [1.0, 2.0], "analysis": {"note": "x"}}
    sf = ScenarioFile.from_dict(d)
    path = tmp_path / "rt.json"
    save_scenario(sf, str(path))
    back = load_scenario(str(path))
    assert back.to_dict() == sf.to_dict()
    assert np.allclose(back.chain(), sf.chain())
    E, _, _, _ = back.build_provider()(0, 0, 0, 0)
    assert np.allclose(E, [1, 1j, 0])


def test_scenario_errors():
    with pytest.raises(ConfigError):
        ScenarioFile.from_dict({"provider": {"kind": "mystery"}})
    with pytest.raises(ConfigError):
        ScenarioFile.from_dict({"provider": {"kind": "constant", "E": [1, 2]}})
    with pytest.raises(ConfigError):
        ScenarioFile.from_dict({"frames": [{"rotation": [[2, 0, 0], [0, 1, 0], [0, 0, 1]]}]})
    with pytest.raises(ConfigError):
        ScenarioFile.from_dict({"frames": [{"boost": {}, "limit": {}}]})
    with pytest.raises(ConfigError):
        ScenarioFile.from_dict({"constants": {"c": -1}})
    with pytest.raises(ConfigError):
        ScenarioFile.from_dict({"provider": {"kind": "plane_wave", "E0": [1, 0, 0]}})


def test_encode():
    assert encode(1 + 2j) == [1.0, 2.0]
    assert encode(np.array([-0.0])) == [0.0]
    assert str(encode(-0.0)) == "0.0"
    assert encode({"a": (np.int64(3), np.float64(1.5))}) == {"a": [3, 1.5]}


def test_write_atomic(tmp_path):
    p = tmp_path / "out.txt"
    p.write_text("old")
    write_atomic(str(p), "new")
    assert p.read_text() == "new"
    assert [f for f in os.listdir(tmp_path) if f.startswith(".tmp-")] == []


def test_module_entry_point(tmp_path):
    s = _scenario(tmp_path, {"provider": {"kind": "crossed"}})
    r = subprocess.run([sys.executable, "-m", "emframes", "transform", s],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "corresponding_point" in r.stdout
