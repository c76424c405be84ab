import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from openqs import __version__, cli
from openqs.entanglement import werner_state


def _state_file(path, rho):
    path.write_text(json.dumps({"dim": len(rho), "re": rho.real.tolist(), "im": rho.imag.tolist()}))
    return str(path)


def _csv_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.fixture(autouse=True)
def _no_env_seed(monkeypatch):
    monkeypatch.delenv("LINDBLAD_SEED", raising=False)


def test_detect_outputs_verdict(tmp_path):
    out = tmp_path / "d.json"
    st = _state_file(tmp_path / "w.json", werner_state(2, -0.6).entries)
    assert cli.run(["detect", "--state", st, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["tool"] == "openqs" and doc["version"] == __version__ and doc["seed"] == 0
    res = doc["result"]
    assert set(res) >= {"min_pt_eig", "verdict", "dims", "concurrence"}
    assert res["verdict"] == "entangled" and abs(res["concurrence"] - 0.6) < 1e-9
    assert abs(res["min_pt_eig"] + 0.3) < 1e-12


def test_exit_codes(tmp_path, monkeypatch):
    assert cli.run(["detect", "--state", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.run(["detect", "--state", str(bad)]) == 2
    assert cli.run(["nonsense"]) == 2
    assert cli.run(["atomfield", "single", "--n", "1,1,0"]) == 2

    def boom(args):
        raise RuntimeError("unexpected")

    monkeypatch.setattr(cli, "cmd_detect", boom)
    st = _state_file(tmp_path / "s.json", np.eye(4) / 4)
    assert cli.run(["detect", "--state", st]) == 1


def test_rerun_is_bit_identical(tmp_path):
    # same arguments, including the output path that is recorded in the config
    for argv, name in ((["atomfield", "two", "--tmax", "5", "--points", "11"], "r.csv"),
                       (["channel", "--builtin", "transposition", "--seed", "3"], "r.json")):
        out = tmp_path / name
        runs = []
        for _ in range(2):
            assert cli.run(argv + ["--out", str(out)]) == 0
            runs.append(out.read_bytes())
        assert runs[0] == runs[1]


def test_env_seed_is_recorded(tmp_path, monkeypatch):
    monkeypatch.setenv("LINDBLAD_SEED", "42")
    out = tmp_path / "c.json"
    assert cli.run(["channel", "--builtin", "identity", "--seed", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["seed"] == 42
    monkeypatch.setenv("LINDBLAD_SEED", "x")
    assert cli.run(["channel", "--builtin", "identity"]) == 2


def test_channel_builtins(tmp_path):
    out = tmp_path / "t.json"
    assert cli.run(["channel", "--builtin", "transposition", "--out", str(out)]) == 0
    res = json.loads(out.read_text())["result"]
    assert res["completely_positive"] is False and res["positive_witness_found"] is False
    assert np.abs(np.array(res["choi_eigenvalues"]) - [-0.5, 0.5, 0.5, 0.5]).max() < 1e-15


def test_werner_repro_csv(tmp_path):
    out = tmp_path / "w.csv"
    assert cli.run(["repro", "--case", "werner-concurrence", "--points", "21", "--out", str(out), "--gnuplot"]) == 0
    text = out.read_text()
    assert text.startswith(f"# tool=openqs version={__version__} seed=0")
    rows = _csv_rows(out)
    assert len(rows) == 21
    for r in rows:
        F = float(r["F"])
        assert abs(float(r["concurrence"]) - max(-F, 0)) < 1e-9
    gp = (tmp_path / "w.gp").read_text()
    assert "'w.csv'" in gp and "concurrence" in gp


def test_gnuplot_needs_out():
    assert cli.run(["repro", "--case", "werner-concurrence", "--gnuplot"]) == 2


def test_two_atom_asymptotic_repro(tmp_path):
    out = tmp_path / "a.json"
    assert cli.run(["repro", "--case", "two-atom-asymptotic", "--out", str(out)]) == 0
    res = json.loads(out.read_text())["result"]
    assert abs(res["concurrence_closed_form"] - 0.5) < 1e-12
    assert abs(res["concurrence_evolved"] - 0.5) < 1e-6
    assert json.loads(out.read_text())["config"]["beta"] == "inf"


def test_evolve_csv(tmp_path):
    gen = tmp_path / "g.json"
    gen.write_text(json.dumps({"dim": 2, "H": {"re": [[0.5, 0], [0, -0.5]]},
                               "C": {"re": [[0.1, 0, 0], [0, 0.1, 0], [0, 0, 0]]}, "basis": "pauli"}))
    st = _state_file(tmp_path / "s.json", np.array([[1, 0], [0, 0]], dtype=complex))
    out = tmp_path / "e.csv"
    assert cli.run(["evolve", "--gen", str(gen), "--state", st, "--t", "2", "--grid", "4", "--out", str(out)]) == 0
    rows = _csv_rows(out)
    assert len(rows) == 5 and float(rows[0]["t"]) == 0 and float(rows[-1]["t"]) == 2
    assert all(float(r["min_eigenvalue"]) >= -1e-12 for r in rows)
    assert float(rows[0]["entropy"]) == 0


def test_markov_compare(tmp_path):
    out = tmp_path / "m.csv"
    assert cli.run(["markov-compare", "--out", str(out)]) == 0
    rows = {r["name"]: r for r in _csv_rows(out)}
    assert rows["weak-coupling"]["cp"] == "1" and rows["redfield"]["cp"] == "0"


def test_entangle_test(tmp_path):
    out = tmp_path / "x.json"
    assert cli.run(["atomfield", "entangle-test", "--out", str(out)]) == 0
    res = json.loads(out.read_text())["result"]
    assert res["fires"] is True


def test_suite_criteria_filter(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert cli.run(["repro", "--case", "suite", "--criteria", "1,3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())["result"]
    assert set(doc["criteria"]) == {"1", "3"} and all(v["passed"] for v in doc["criteria"].values())
    assert "criterion  1 PASS" in capsys.readouterr().err
    assert cli.run(["repro", "--case", "suite", "--criteria", "99"]) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "openqs", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and __version__ in r.stdout
