import csv
import json
import math

import pytest

from hadamard_fde.cli import EXIT_ERROR, EXIT_NO_CONVERGENCE, EXIT_OK, EXIT_USAGE, run_command

LIN = {"alpha": 0.5, "beta": 1, "n": 1, "a": 1, "b": 2.71828, "initial_values": [1],
       "rhs": {"kind": "linear", "lambda": 1}}


@pytest.fixture
def spec_file(tmp_path):
    def write(**changes):
        doc = dict(LIN, **changes)
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        return str(path)
    return write


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_solve_writes_trajectory_and_summary(spec_file, tmp_path, capsys):
    out = tmp_path / "sol.csv"
    side = tmp_path / "sol.json"
    code = run_command(["solve", "--spec", spec_file(), "--out", str(out), "--nodes", "257",
                        "--json", str(side)])
    assert code == EXIT_OK
    rows = read_csv(out)
    assert rows[0] == ["t", "u", "weighted_value", "raw_value"]
    assert len(rows) == 258
    # beta = 1 gives gamma = 1: no singularity at a
    assert float(rows[1][0]) == 1.0 and float(rows[1][3]) == 1.0
    summary = capsys.readouterr().out
    assert "residual_norm=" in summary and "K=" in summary and "subintervals" in summary
    meta = json.loads(side.read_text())
    assert meta["subintervals"] == len(meta["omegas"]) >= 1
    assert max(meta["omegas"]) <= 0.5


def test_solve_reports_infinite_raw_value_at_singular_start(spec_file, tmp_path):
    out = tmp_path / "sol.csv"
    assert run_command(["solve", "--spec", spec_file(beta=0), "--out", str(out), "--nodes", "65"]) == EXIT_OK
    first = read_csv(out)[1]
    assert first[3] == "inf" and math.isfinite(float(first[2]))


def test_solve_output_is_deterministic(spec_file, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run_command(["solve", "--spec", spec_file(), "--out", str(p), "--nodes", "129"]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_verify_identities_table(tmp_path, capsys):
    out = tmp_path / "ids.csv"
    code = run_command(["verify-identities", "--alpha", "0.9", "--nodes", "513", "--out", str(out)])
    rows = read_csv(out)
    assert rows[0] == ["check", "max_rel_error", "threshold", "passed"]
    assert len(rows) == 6
    passed = [r[3] == "true" for r in rows[1:]]
    # exit status mirrors the table
    assert code == (EXIT_OK if all(passed) else EXIT_ERROR)
    assert "within threshold" in capsys.readouterr().out


def test_perturb_ic_verdict(spec_file, tmp_path, capsys):
    out = tmp_path / "rep.csv"
    side = tmp_path / "rep.json"
    code = run_command(["perturb-ic", "--spec", spec_file(), "--epsilon", "0.01", "--out", str(out),
                        "--json", str(side)])
    assert code == EXIT_OK
    assert read_csv(out)[0] == ["t", "measured_gap", "envelope", "margin"]
    assert json.loads(side.read_text())["verdict"] is True
    assert "verdict=true" in capsys.readouterr().out


def test_perturb_order(spec_file, tmp_path, capsys):
    out = tmp_path / "rep.csv"
    code = run_command(["perturb-order", "--spec", spec_file(alpha=0.9, beta=0), "--delta", "0.05",
                        "--out", str(out), "--nodes", "257"])
    assert code == EXIT_OK
    assert len(read_csv(out)) == 33
    assert "verdict=true" in capsys.readouterr().out


def test_gronwall_command(tmp_path, capsys):
    out = tmp_path / "g.csv"
    code = run_command(["gronwall", "--alpha", "0.5", "--u", "1", "--psi", "1", "--nodes", "65",
                        "--out", str(out)])
    assert code == EXIT_OK
    rows = read_csv(out)
    assert rows[0] == ["t", "u", "bound"]
    assert float(rows[1][2]) == 1.0
    assert "bound_at_b=" in capsys.readouterr().out


def test_gronwall_rejects_x_dependence(tmp_path):
    assert run_command(["gronwall", "--alpha", "0.5", "--u", "x", "--psi", "1",
                        "--out", str(tmp_path / "g.csv")]) == EXIT_USAGE


def test_converge_command(spec_file, tmp_path):
    out = tmp_path / "c.csv"
    code = run_command(["converge", "--spec", spec_file(alpha=0.9), "--nodes", "129,257", "--out", str(out)])
    assert code == EXIT_OK
    rows = read_csv(out)
    assert rows[0] == ["nodes", "h", "error", "order"]
    assert [r[0] for r in rows[1:]] == ["129", "257"]


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["solve", "--spec", "x.json"],
    ["solve", "--spec", "x.json", "--out", "y.csv", "--bogus"],
    ["converge", "--spec", "x.json", "--out", "y.csv", "--nodes", "129"],
    ["verify-identities", "--alpha", "half"],
])
def test_usage_errors(argv, capsys):
    assert run_command(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_bad_log_level_is_a_usage_error(monkeypatch):
    monkeypatch.setenv("FDE_LOG_LEVEL", "loud")
    assert run_command(["verify-identities", "--alpha", "0.5"]) == EXIT_USAGE


def test_debug_log_level_is_accepted(monkeypatch, spec_file, tmp_path):
    monkeypatch.setenv("FDE_LOG_LEVEL", "debug")
    assert run_command(["solve", "--spec", spec_file(), "--out", str(tmp_path / "s.csv"),
                        "--nodes", "33"]) == EXIT_OK


def test_validation_error_exit_code(spec_file, tmp_path, capsys):
    assert run_command(["solve", "--spec", spec_file(alpha=1.5), "--out", str(tmp_path / "s.csv")]) == EXIT_ERROR
    assert "alpha" in capsys.readouterr().err


def test_missing_spec_file(tmp_path):
    assert run_command(["solve", "--spec", str(tmp_path / "nope.json"), "--out", str(tmp_path / "s.csv")]) \
        == EXIT_ERROR


def test_non_convergence_exit_code(spec_file, tmp_path, capsys):
    path = spec_file(max_iter=1, tol=1e-14)
    assert run_command(["solve", "--spec", path, "--out", str(tmp_path / "s.csv"), "--nodes", "65"]) \
        == EXIT_NO_CONVERGENCE
    assert "did not converge" in capsys.readouterr().err


def test_version(capsys):
    assert run_command(["--version"]) == EXIT_OK
    assert "hadamard-fde" in capsys.readouterr().out
