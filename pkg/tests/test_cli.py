import json

import numpy as np
import pytest

from burnstab.cli import main
from burnstab.model import Params
from burnstab.simulate import read_trajectory_csv

BENCH_FLAGS = ["--alpha", "1", "--beta", "1", "--gamma", "1", "--zeta", "2.5", "--eta", "1", "--f0", "1"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_equilibrium_command(capsys):
    code, out, _ = run(capsys, "equilibrium", *BENCH_FLAGS, "--theta", "-0.1")
    assert code == 0
    doc = json.loads(out)
    assert doc["a_star"] == pytest.approx(0.4) and doc["b_star"] == pytest.approx(0.2)
    assert doc["feasibility"]["feasible"]
    assert Params.from_dict(doc["params"]) == Params(1, 1, 1, 2.5, 1, -0.1, 1)


def test_missing_flag_exits_2(capsys):
    code, _, err = run(capsys, "equilibrium", "--alpha", "1")
    assert code == 2 and "missing" in err
    code, _, _ = run(capsys, "equilibrium")
    assert code == 2
    code, _, _ = run(capsys, "nonsense")
    assert code == 2


def test_invalid_value_exits_2(capsys):
    code, _, err = run(capsys, "classify", *BENCH_FLAGS, "--theta", "0")
    assert code == 2 and "theta" in err


def test_params_file_equivalent_to_flags(capsys, tmp_path):
    f = tmp_path / "p.json"
    f.write_text(json.dumps(Params(1, 1, 1, 2.5, 1, 20.0, 1).to_dict()))
    _, a, _ = run(capsys, "classify", "--params", f)
    _, b, _ = run(capsys, "classify", *BENCH_FLAGS, "--theta", "20")
    assert a == b
    code, _, _ = run(capsys, "classify", "--params", f, "--alpha", "2")
    assert code == 2
    code, _, _ = run(capsys, "classify", "--params", tmp_path / "missing.json")
    assert code == 2


def test_emitted_params_round_trip(capsys, tmp_path):
    _, out, _ = run(capsys, "classify", *BENCH_FLAGS, "--vartheta", "0.1")
    doc = json.loads(out)
    f = tmp_path / "p.json"
    f.write_text(json.dumps(doc["params"]))
    _, out2, _ = run(capsys, "classify", "--params", f)
    assert json.loads(out2) == doc


def test_classify_regimes(capsys):
    for flag, regime in (("20", "UnstableFocus"), ("0.1", "Stable_ComplexPair"), ("-1", "UnstableSaddle_ComplexPair")):
        _, out, _ = run(capsys, "classify", *BENCH_FLAGS, "--theta", flag)
        assert json.loads(out)["regime"] == regime


def test_simulate_crossing(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", *BENCH_FLAGS, "--theta", "1", "--crossing-experiment", "--level", "0.5", "--out", tmp_path)
    assert code == 0
    doc = json.loads(out)
    assert doc["crossing"]["crossed"] and doc["crossing"]["event_in_unit_box"]
    assert "# event,BCrossesA," in (tmp_path / "trajectory.csv").read_text()
    assert json.loads((tmp_path / "simulate.json").read_text()) == doc


def test_out_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("BURNSTAB_OUT", str(tmp_path / "env"))
    code, _, _ = run(capsys, "simulate", *BENCH_FLAGS, "--theta", "1", "--t-end", "1")
    assert code == 0 and (tmp_path / "env" / "trajectory.csv").exists()


def test_svg_does_not_change_numbers(capsys, tmp_path):
    args = ["simulate", *BENCH_FLAGS, "--theta", "20", "--perturb", "1e-3,0,0", "--t-end", "20"]
    run(capsys, *args, "--out", tmp_path / "plain")
    run(capsys, *args, "--out", tmp_path / "svg", "--svg")
    assert (tmp_path / "plain" / "trajectory.csv").read_bytes() == (tmp_path / "svg" / "trajectory.csv").read_bytes()
    svg = (tmp_path / "svg" / "trajectory.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg


def test_ensemble_seeded(capsys, tmp_path):
    base = ["ensemble", *BENCH_FLAGS, "--theta", "0.1", "--n", "3", "--t-end", "20"]
    run(capsys, *base, "--seed", "5", "--out", tmp_path / "a", "--svg")
    run(capsys, *base, "--seed", "5", "--out", tmp_path / "b")
    run(capsys, *base, "--seed", "6", "--out", tmp_path / "c")
    for i in range(3):
        name = f"member_{i:03d}.csv"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "member_000.csv").read_bytes() != (tmp_path / "c" / "member_000.csv").read_bytes()
    doc = json.loads((tmp_path / "a" / "ensemble.json").read_text())
    assert doc["n"] == 3 and doc["all_contract"] and doc["invariance_violations"] == 0
    assert (tmp_path / "a" / "ensemble.svg").exists()


def test_numerical_failure_exits_3_with_partial_output(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", *BENCH_FLAGS, "--theta", "20", "--init", "0.5,1,0.1", "--method", "rk4", "--step", "1e100", "--t-end", "1e101", "--out", tmp_path)
    assert code == 3
    header, data, _ = read_trajectory_csv(tmp_path / "trajectory.csv")
    assert header == ["t", "a", "f", "b"] and len(data) >= 1 and np.all(np.isfinite(data))
    assert "error" in json.loads(out)


def test_sweep_command(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", *BENCH_FLAGS, "--theta", "1", "--axis", "theta:0.1:20:5", "--out", tmp_path)
    assert code == 0 and json.loads(out)["rows"] == 5
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert len(lines) == 6 and lines[0].startswith("alpha,beta,gamma,zeta,eta,theta,f0,a_le_1")
    code, _, _ = run(capsys, "sweep", *BENCH_FLAGS, "--theta", "1", "--axis", "theta:1:2:100", "--cap", "10", "--out", tmp_path)
    assert code == 2
    code, _, _ = run(capsys, "sweep", *BENCH_FLAGS, "--theta", "1", "--axis", "theta:1:2", "--out", tmp_path)
    assert code == 2


def test_feedback_design_command(capsys, tmp_path):
    code, out, _ = run(capsys, "feedback-design", *BENCH_FLAGS, "--theta", "-1", "--closed-loop", "--out", tmp_path, "--svg")
    assert code == 0
    doc = json.loads(out)
    assert doc["lambda1"] == pytest.approx(2 ** (1 / 3) - 1)
    assert len(doc["closed_loop_eigenvalues"]) == 4 and all(re < 0 for re, _ in doc["closed_loop_eigenvalues"])
    header, data, _ = read_trajectory_csv(tmp_path / "closed_loop.csv")
    assert header == ["t", "x1", "re_x2", "im_x2", "re_x3", "im_x3", "omega"]
    assert (tmp_path / "closed_loop.svg").exists()


def test_feedback_design_rejects_non_saddle(capsys):
    code, _, err = run(capsys, "feedback-design", *BENCH_FLAGS, "--theta", "1")
    assert code == 2 and "spectrum" in err


def test_hopf_and_family_commands(capsys):
    code, out, _ = run(capsys, "hopf", *BENCH_FLAGS, "--theta", "1", "--free", "vartheta")
    assert code == 0 and json.loads(out)["roots"][0]["value"] == pytest.approx(9.0)
    code, _, _ = run(capsys, "hopf", *BENCH_FLAGS, "--theta", "0.1", "--free", "gamma")
    assert code == 3
    code, out, _ = run(capsys, "family", "--family", "LargeAlphaPositiveDisc")
    assert code == 0 and json.loads(out)["discriminant"] > 0
    code, _, _ = run(capsys, "family", "--family", "SmallCNegativeDisc", "--theta", "-1")
    assert code == 3


def test_streamlines_command(capsys, tmp_path):
    code, out, _ = run(capsys, "streamlines", *BENCH_FLAGS, "--theta", "20", "--count", "3", "--plane", "a,b", "--svg", "--out", tmp_path)
    assert code == 0 and json.loads(out)["samples"] == 9
    lines = (tmp_path / "streamlines.csv").read_text().splitlines()
    assert lines[0] == "a,b,da,db" and len(lines) == 10
    assert (tmp_path / "streamlines.svg").exists()
    code, _, _ = run(capsys, "streamlines", *BENCH_FLAGS, "--theta", "20", "--plane", "a,a", "--out", tmp_path)
    assert code == 2
