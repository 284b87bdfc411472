import json

import numpy as np
import pytest

from chi2qudit.cli import main
from chi2qudit.liealg import h2_generators
from chi2qudit.operators import OperatorMatrix
from chi2qudit.synthesis import SynthesisProblem, random_target_su


def _run(tmp_path, *args):
    return main(["--out", str(tmp_path), *args])


@pytest.mark.parametrize("n, dim", [(1, 4), (2, 9)])
def test_closure_command(tmp_path, capsys, n, dim):
    assert _run(tmp_path, "closure", "--n", str(n)) == 0
    rep = json.loads((tmp_path / f"closure_n{n}.json").read_text())
    assert rep["passed"] and rep["checks"][0]["measured"] == dim
    assert (tmp_path / f"closure_n{n}.timing.json").exists()
    assert "PASS closure.dimension" in capsys.readouterr().out


def test_closure_output_is_deterministic(tmp_path):
    _run(tmp_path / "a", "closure", "--n", "2")
    _run(tmp_path / "b", "closure", "--n", "2")
    assert (tmp_path / "a/closure_n2.json").read_bytes() == (tmp_path / "b/closure_n2.json").read_bytes()


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as e:
        _run(tmp_path, "closure", "--n", "two")
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        _run(tmp_path, "verify", "nonsense")
    assert e.value.code == 2
    assert _run(tmp_path, "closure", "--n", "0") == 2
    assert _run(tmp_path, "trotter", "--n", "1") == 2
    assert _run(tmp_path, "synthesize", "--problem", str(tmp_path / "missing.json")) == 2


def test_malformed_problem_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(tmp_path, "synthesize", "--problem", str(bad)) == 2
    bad.write_text('{"generators": 3}')
    assert _run(tmp_path, "synthesize", "--problem", str(bad)) == 2


def test_h2_matrices_reports_table_failures(tmp_path, capsys):
    # the tabulated forms do not all agree with the ladder definitions
    assert _run(tmp_path, "verify", "h2-matrices") == 1
    out = capsys.readouterr().out
    assert "PASS h2-matrices.table.G2" in out and "FAIL h2-matrices.table.G1" in out


@pytest.mark.parametrize("suite, extra, name", [
    ("lambda2z", [], "lambda2z"),
    ("lambda3z", ["--berry", "1"], "lambda3z_berry+1"),
    ("lambda3z", ["--berry", "-1"], "lambda3z_berry-1"),
])
def test_gate_suites_pass(tmp_path, suite, extra, name):
    assert _run(tmp_path, "verify", suite, *extra) == 0
    rep = json.loads((tmp_path / f"{name}.json").read_text())
    assert rep["data"]["netlist"]["gates"]


def test_injection_suite_without_subtraction(tmp_path):
    assert _run(tmp_path, "verify", "injection", "--no-subtraction") == 0
    rep = json.loads((tmp_path / "injection.json").read_text())
    assert rep["data"]["rotation_as_written"]["failed_step"] == "psi3"


def test_trotter_writes_csv(tmp_path):
    assert _run(tmp_path, "trotter", "--m-max", "64") == 0
    lines = (tmp_path / "trotter_n2_axis1.csv").read_text().splitlines()
    assert lines[0] == "m,distance" and len(lines) == 8


def test_synthesize_and_replay(tmp_path):
    G = h2_generators()
    gens = [G[f"G{k}"] for k in range(1, 10)]
    prob = SynthesisProblem(gens, target=random_target_su(3, 11, gens[0].basis), n_segments=18, tol=1e-6)
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(prob.to_json()))
    assert _run(tmp_path, "synthesize", "--problem", str(path)) == 0
    seq = tmp_path / "sequence.json"
    assert seq.exists()
    assert _run(tmp_path / "r", "synthesize", "--problem", str(path), "--replay", str(seq)) == 0


def test_replay_of_wrong_sequence_fails(tmp_path):
    G = h2_generators()
    gens = [G["G1"], G["G2"]]
    prob = SynthesisProblem(gens, target=OperatorMatrix(gens[0].basis, np.diag([1, 1j, -1j])), n_segments=4)
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(prob.to_json()))
    seq = tmp_path / "seq.json"
    seq.write_text(json.dumps({"steps": [[0, 1.0]], "achieved_residual": 0.0, "success": True}))
    assert _run(tmp_path, "synthesize", "--problem", str(path), "--replay", str(seq)) == 1


def test_report_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CHI2_REPORT_DIR", str(tmp_path / "env"))
    assert main(["closure", "--n", "1"]) == 0
    assert (tmp_path / "env/closure_n1.json").exists()
