import json
import subprocess
import sys

import pytest

from infoclosure import __version__, bundled, measure, save_scenario
from infoclosure.cli import main
from infoclosure.functional import FunctionTable
from infoclosure.probability import Variable
from infoclosure.report import to_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out), err


# -- analyze -----------------------------------------------------------------

def test_analyze_decoupled_closed(capsys):
    code, rep, _ = run_json(capsys, "analyze", "--scenario", "decoupled", "--step", "5")
    assert code == 0
    assert rep["steps"][0]["measures"]["info_closure"] == 0.0
    assert rep["result"] == "closed"
    assert rep["tool"] == {"name": "closure", "version": __version__}
    assert rep["source"]["fingerprint"].startswith("sha256:")


def test_analyze_driven_open(capsys):
    code, rep, _ = run_json(capsys, "analyze", "--scenario", "driven", "--step", "1")
    assert code == 3
    assert rep["steps"][0]["measures"]["info_closure"] > 0.1


def test_analyze_copy_delta_flags_over_budget(capsys):
    code, rep, err = run_json(capsys, "analyze", "--scenario", "copy", "--step", "1", "--delta", "0.5")
    d = rep["steps"][0]["delta"]
    assert d["over_budget"] and d["infeasible"]
    codes = {w["code"] for w in rep["warnings"]}
    assert {"delta-over-budget", "delta-infeasible"} <= codes
    assert "delta-infeasible" in err
    assert code == 0  # still informationally closed


def test_analyze_text_has_six_decimals(capsys):
    code, out, _ = run(capsys, "analyze", "--scenario", "copy", "--step", "1", "--format", "text")
    assert code == 0
    assert "env_coupling" in out and "1.000000" in out
    assert "result: closed" in out


def test_analyze_scenario_file(tmp_path, capsys):
    path = tmp_path / "sc.json"
    save_scenario(bundled("driven"), path)
    code, rep, _ = run_json(capsys, "analyze", "--scenario", str(path), "--step", "2")
    assert code == 3
    assert rep["steps"][0]["measures"]["info_closure"] == pytest.approx(
        measure(bundled("driven"), 2).info_closure)


def test_analyze_trajectories(tmp_path, capsys):
    traj = tmp_path / "t.csv"
    code, _, _ = run(capsys, "sample", "--scenario", "copy", "--count", "5000", "--horizon", "3",
                     "--seed", "4", "--write-trajectories", str(traj))
    assert code == 0 and traj.exists()
    code, rep, _ = run_json(capsys, "analyze", "--trajectories", str(traj), "--outer-env", "e",
                            "--step", "1")
    assert code == 0
    assert rep["tolerance"] == 0.01
    assert rep["steps"][0]["measures"]["env_coupling"] == pytest.approx(1.0, abs=0.01)
    code, rep, _ = run_json(capsys, "analyze", "--trajectories", str(traj), "--outer-env", "e",
                            "--step", "1", "--estimator", "miller_madow")
    assert code == 0 and rep["source"]["estimator"] == "miller_madow"


# -- sweep -------------------------------------------------------------------

def test_sweep_decoupled_all_closed(capsys):
    code, rep, _ = run_json(capsys, "sweep", "--scenario", "decoupled", "--steps", "0..10")
    assert code == 0
    assert [r["step"] for r in rep["steps"]] == list(range(11))
    assert all(abs(r["measures"]["info_closure"]) < 1e-9 for r in rep["steps"])
    assert rep["summary"]["info_closure"]["max"] < 1e-9


def test_sweep_copy_matches_hand_propagation(capsys):
    # period-3 cycle: (s,e) uniform s with e=0 -> e copies s -> s'=0 -> ...
    code, rep, _ = run_json(capsys, "sweep", "--scenario", "copy", "--steps", "0..3")
    got = [(r["measures"]["env_coupling"], r["measures"]["info_closure"]) for r in rep["steps"]]
    assert got == [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.0, 0.0)]
    assert code == 3


def test_sweep_empty_range_is_argument_error(capsys):
    code, out, err = run(capsys, "sweep", "--scenario", "copy", "--steps", "3..1")
    assert code == 1 and out == "" and "empty step range" in err


# -- input errors ------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["analyze"],
    ["analyze", "--scenario", "copy", "--trajectories", "x.csv"],
    ["analyze", "--scenario", "copy", "--tolerance", "0"],
    ["analyze", "--scenario", "copy", "--delta", "-1"],
    ["analyze", "--scenario", "no-such-file.json"],
    ["analyze", "--scenario", "copy", "--step", "20000"],
    ["sample", "--scenario", "copy", "--count", "10", "--horizon", "2", "--seed", "-1"],
    ["fd", "--table", "missing.csv"],
    ["bogus"],
])
def test_usage_and_input_errors_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == "" and err.startswith("error:")


def test_schema_error_has_location(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"name": "x",\n "variables": 3}')
    code, _, err = run(capsys, "analyze", "--scenario", str(path))
    assert code == 1 and "bad.json" in err


def test_format_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("INFOCLOSURE_FORMAT", "json")
    code, out, _ = run(capsys, "analyze", "--scenario", "copy", "--step", "1")
    assert json.loads(out)["command"] == "analyze"
    monkeypatch.setenv("INFOCLOSURE_FORMAT", "xml")
    code, _, _ = run(capsys, "analyze", "--scenario", "copy")
    assert code == 1


def test_output_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "analyze", "--scenario", "copy", "--format", "json",
                          "--output", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["command"] == "analyze"


# -- fd ----------------------------------------------------------------------

def _xor_table(tmp_path):
    inputs = [Variable(f"x{i}", 2) for i in (1, 2, 3)]
    t = FunctionTable.from_function(inputs, Variable("y", 2), lambda a, b, c: str(int(a) ^ int(b)))
    path = tmp_path / "xor.csv"
    t.to_csv(path)
    return path


def test_fd_closed_and_open(tmp_path, capsys):
    path = _xor_table(tmp_path)
    code, rep, _ = run_json(capsys, "fd", "--table", str(path), "--env", "x3")
    assert code == 0 and rep["closure"]["evidence"]["members"] == ["x1", "x2"]
    assert [m["members"] for m in rep["minimal_sets"]] == [["x1", "x2"]]
    code, rep, _ = run_json(capsys, "fd", "--table", str(path), "--env", "x2")
    assert code == 3 and rep["result"] == "open"
    code, rep, _ = run_json(capsys, "fd", "--table", str(path))
    assert code == 0 and rep["closure"] is None


# -- verify ------------------------------------------------------------------

def test_verify_default_passes(capsys):
    code, rep, _ = run_json(capsys, "verify")
    assert code == 0 and rep["identities"]["cases"] == 1000
    assert rep["identities"]["failure_count"] == 0 and rep["derivation"]["passed"]


def test_verify_tiny_tolerance_fails_with_names(capsys):
    code, rep, _ = run_json(capsys, "verify", "--tolerance", "1e-15")
    assert code == 3 and rep["result"] == "fail"
    assert rep["identities"]["failure_count"] > 0
    assert all("name" in f and "case" in f for f in rep["identities"]["failures"])


def test_verify_seed_override(capsys):
    _, a, _ = run_json(capsys, "verify", "--cases", "200")
    code, b, _ = run_json(capsys, "verify", "--cases", "200", "--seed", "7")
    assert code == 0 and b["result"] == a["result"] == "pass"
    assert a["identities"]["worst"] != b["identities"]["worst"]


# -- report format -----------------------------------------------------------

def test_json_round_trip_is_byte_identical(capsys):
    for argv in (["analyze", "--scenario", "driven", "--step", "2", "--delta", "0.1"],
                 ["sweep", "--scenario", "copy", "--steps", "0..4"],
                 ["verify", "--cases", "50"]):
        _, out, _ = run(capsys, *argv, "--format", "json")
        assert to_json(json.loads(out)) == out


def test_installed_entry_point():
    proc = subprocess.run([sys.executable, "-m", "infoclosure.cli", "analyze", "--scenario",
                           "driven", "--step", "1", "--format", "json"],
                          capture_output=True, text=True)
    assert proc.returncode == 3
    assert json.loads(proc.stdout)["result"] == "open"
