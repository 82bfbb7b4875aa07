import csv
import io
import json

import pytest

from heatcube.cli import run


def _json(capsys, argv):
    code = run(argv + ["--no-meta"])
    return code, json.loads(capsys.readouterr().out)


def test_verify_identity_example(capsys):
    code, rep = _json(capsys, ["verify-identity", "--n", "6", "--trials", "100", "--seed", "7"])
    assert code == 0
    assert rep["verdict"] == "pass"
    assert rep["residuals"]["max_residual"] <= 1e-10
    assert rep["config"]["seed"] == 7
    assert len(rep["results"]) == 100
    assert set(rep) == {"config", "results", "residuals", "verdict"}


def test_sharp_distortion_example(capsys):
    code, rep = _json(capsys, ["distortion", "--sharp", "--n", "6", "--d", "2", "--p", "1"])
    assert code == 0
    assert rep["results"][0]["edge_antipodal_ratio"] == 3.0
    assert rep["results"][0]["distortion"] == "inf"


def test_borsuk_example(capsys):
    code, rep = _json(capsys, ["borsuk", "--n", "5", "--range-dim", "2", "--seed", "1"])
    assert code == 0
    for row in rep["results"]:
        assert row["residual"] <= 1e-8
        assert row["restricted_poincare"]["holds"] is True


@pytest.mark.parametrize("argv", [
    ["semigroup", "--n", "5", "--trials", "3"],
    ["poincare", "--n", "4", "--d", "3", "--p", "1.5", "--trials", "5"],
    ["pisier", "--n", "4", "--mode", "orlicz", "--alpha", "0.3", "--trials", "3"],
    ["enflo", "--n", "4", "--p", "1", "--trials", "5"],
    ["stable-type", "--n", "4", "--p", "1.5", "--trials", "3"],
    ["simulate", "--n", "3", "--trials", "20", "--samples", "4000"],
    ["verify-identity", "--n", "4", "--trials", "5", "--theta", "random", "--t", "0.3",
     "--alpha", "0.2,0.4,0.6,0.8", "--fourier-sparse", "3"],
    ["distortion", "--map", "identity", "--n", "4", "--p", "2"],
    ["distortion", "--n", "5", "--d", "2", "--snowflake", "0.5", "--sp", "1.5"],
])
def test_subcommands_pass(capsys, argv):
    code, rep = _json(capsys, argv)
    assert code == 0, rep
    assert rep["verdict"] == "pass"


@pytest.mark.parametrize("argv", [
    ["borsuk", "--n", "3", "--range-dim", "3"],
    ["verify-identity", "--q", "1.5"],
    ["verify-identity", "--alpha", "0.1,0.2"],
    ["distortion", "--sharp", "--n", "8", "--d", "2"],
    ["poincare", "--p", "3"],
    ["verify-identity", "--theta", "nope"],
])
def test_config_errors_exit_two(capsys, argv):
    assert run(argv) == 2


def test_violation_exits_one_and_serialises_instance(capsys):
    # a budget constant of zero cannot hold for a non-constant f
    code = run(["poincare", "--n", "3", "--trials", "2", "--tp", "1e-6", "--no-meta"])
    rep = json.loads(capsys.readouterr().out)
    assert code == 1
    assert rep["verdict"] == "fail"
    assert rep["violations"]


def test_determinism_and_workers(capsys, monkeypatch):
    argv = ["verify-identity", "--n", "4", "--trials", "8", "--seed", "3", "--no-meta"]
    run(argv)
    first = capsys.readouterr().out
    monkeypatch.setenv("HEATCUBE_WORKERS", "2")
    run(argv)
    assert capsys.readouterr().out == first


def test_meta_and_csv_output(capsys, tmp_path):
    run(["enflo", "--n", "3", "--trials", "2"])
    assert "timestamp" in json.loads(capsys.readouterr().out)["meta"]
    out = tmp_path / "r.csv"
    assert run(["enflo", "--n", "3", "--trials", "2", "--format", "csv", "--output", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 2 and "ratio" in rows[0]
