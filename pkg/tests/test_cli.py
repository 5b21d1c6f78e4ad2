import json
import subprocess
import sys

import numpy as np
import pytest

from qsysid import cli, io
from qsysid.cli import run
from qsysid.errors import EstimationFailedError
from qsysid.estimator import estimate
from qsysid.model import ModelParams
from qsysid.sampling import uniform_grid
from qsysid.simulator import simulate_trace


@pytest.fixture
def trace(tmp_path):
    path = tmp_path / "d.csv"
    assert run(["simulate", "--omega", "2", "--alpha", "0.7854", "--nt", "256", "--seed", "1", "-o", str(path)]) == 0
    return path


def test_simulate_writes_header_and_rows(trace):
    lines = trace.read_text().splitlines()
    assert lines[0] == "t,d,shots"
    assert len(lines) == 257
    t, d, shots = lines[1].split(",")
    assert float(t) == 0.0 and 0 <= float(d) <= 1 and int(shots) >= 100


def test_simulate_matches_library(trace):
    data = io.read_data(trace, 100.0)
    ref = simulate_trace(ModelParams(2.0, 0.7854), uniform_grid(100.0, 256), 1)
    np.testing.assert_array_equal(data.values, ref.values)
    np.testing.assert_array_equal(data.shots, ref.shots)


def test_estimate_is_deterministic(trace, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run(["estimate", "-i", str(trace), "--T", "100", "-o", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["omega3"] == pytest.approx(2.0, abs=1e-3)


def test_file_round_trip_matches_in_memory(trace, tmp_path):
    out = tmp_path / "e.json"
    assert run(["estimate", "-i", str(trace), "--T", "100", "-o", str(out)]) == 0
    ref = simulate_trace(ModelParams(2.0, 0.7854), uniform_grid(100.0, 256), 1)
    assert out.read_text() == io.dump_json(estimate(ref).to_dict())


def test_spectrum_and_likelihood(trace, tmp_path):
    spec, like = tmp_path / "s.csv", tmp_path / "l.csv"
    assert run(["spectrum", "-i", str(trace), "--T", "100", "-o", str(spec)]) == 0
    assert run(["likelihood", "-i", str(trace), "--omega-min", "1.9", "--omega-max", "2.1", "--step", "0.001",
                "-o", str(like)]) == 0
    s = np.loadtxt(spec, delimiter=",", skiprows=1)
    assert s.shape == (129, 2)
    lp = np.loadtxt(like, delimiter=",", skiprows=1)
    assert lp[np.argmax(lp[:, 1]), 0] == pytest.approx(2.0, abs=2e-3)


def test_simulate_noiseless_and_couplings(tmp_path):
    path = tmp_path / "n.csv"
    args = ["simulate", "--omega1", "1.2", "--omega2", "1.6", "--nt", "32", "--mode", "stratified",
            "--seed", "3", "--noiseless", "-o", str(path)]
    assert run(args) == 0
    assert path.read_text().splitlines()[0] == "t,d"


def test_missing_seed_is_reported(tmp_path, capsys):
    assert run(["simulate", "--omega", "2", "--alpha", "0.5", "--nt", "8", "-o", str(tmp_path / "x.csv")]) == 0
    assert "seed:" in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    assert run(["simulate", "--omega", "2", "--nt", "8", "-o", str(tmp_path / "x.csv")]) == 2
    assert run(["estimate", "-i", str(tmp_path / "missing.csv")]) == 2
    assert run(["bogus"]) == 2


@pytest.mark.parametrize(
    "body, needle",
    [
        ("t,d\n0,0.5\n1,oops\n2,0.1\n", ":3: field 'd'"),
        ("t,d\n0,0.5\n1,1.5\n2,0.1\n", ":3: field 'd'"),
        ("t,d\n0,0.5\n0,0.4\n2,0.1\n", ":3: field 't'"),
        ("t,x\n0,0.5\n", ":1: header"),
        ("t,d\n0,0.5,7\n", ":2: expected 2 fields"),
    ],
)
def test_malformed_csv(tmp_path, capsys, body, needle):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    assert run(["estimate", "-i", str(path)]) == 2
    assert needle in capsys.readouterr().err


def test_estimation_failure_exits_one(trace, tmp_path, monkeypatch):
    def boom(data, cfg):
        raise EstimationFailedError("no interior likelihood maximum", {"boundary_omega": 1.0})

    monkeypatch.setattr(cli, "estimate", boom)
    out = tmp_path / "diag.json"
    assert run(["estimate", "-i", str(trace), "-o", str(out)]) == 1
    assert json.loads(out.read_text())["diagnostics"] == {"boundary_omega": 1.0}


def test_identify_reports_blocks(tmp_path):
    system = {
        "M": [1, 0, 0, 0],
        "H": [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0.5], [0, 0, 0.5, 2]],
        "rho0": [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
        "H_alt": {"re": [[0, 1, 0, 0], [1, 0.3, 0, 0], [0, 0, 1, 0.5], [0, 0, 0.5, 2]]},
    }
    path, out = tmp_path / "sys.json", tmp_path / "id.json"
    path.write_text(json.dumps(system))
    assert run(["identify", "-i", str(path), "--seed", "4", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["blocks"] == [[0, 1], [2, 3]]
    assert rep["block_shift"]["indistinguishable"] and rep["gauge"]["indistinguishable"]
    assert not rep["comparison"]["indistinguishable"]


def test_identify_rejects_bad_json(tmp_path, capsys):
    path = tmp_path / "sys.json"
    path.write_text('{"M": [1, 0],\n "H": [[0, 1], [1, 0]]\n')
    assert run(["identify", "-i", str(path)]) == 2
    assert "sys.json:3" in capsys.readouterr().err
    path.write_text('{"M": [1, 0], "H": [[0, 1], [1, 0]]}')
    assert run(["identify", "-i", str(path)]) == 2
    assert "rho0" in capsys.readouterr().err


def test_benchmark_command(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_systems": 2, "plans": [["uniform", 128]], "seed": 3}))
    out, summ = tmp_path / "r.csv", tmp_path / "s.json"
    assert run(["benchmark", "-c", str(cfg), "-o", str(out), "--summary", str(summ)]) == 0
    assert len(out.read_text().splitlines()) == 3
    assert json.loads(summ.read_text())["total"] == 2


def test_module_entry_point(trace):
    proc = subprocess.run([sys.executable, "-m", "qsysid", "estimate", "-i", str(trace)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["method"] == "seeded"
