import json

import numpy as np
import pytest

from dimred_assoc import cli
from dimred_assoc.cli import RunManifest, main, run_command
from dimred_assoc.estimates import NumericalError
from dimred_assoc.maximin import ScenarioError
from dimred_assoc.serialize import read_sweep_csv


def test_mc_sweep_small(tmp_path, capsys):
    rc = main(["mc-sweep", "--runs", "10", "--c-min", "0.5", "--c-max", "1.5",
               "--c-step", "0.5", "--out", str(tmp_path)])
    assert rc == 0
    res = read_sweep_csv(tmp_path / "mc_sweep.csv")
    assert [r.c for r in res.rows[:3]] == [0.5, 1.0, 1.5] and len(res.rows) == 9
    meta = json.loads((tmp_path / "mc-sweep.json").read_text())
    assert meta["seed"] == 1 and len(meta["config_hash"]) == 64
    assert meta["config"]["runs"] == 10 and meta["wall_time_s"] >= 0


def test_missing_config_exit_1(tmp_path):
    assert main(["motivating", "--config", str(tmp_path / "nope.yaml"),
                 "--out", str(tmp_path)]) == 1


def test_bad_override_exit_1(tmp_path):
    assert main(["mc-sweep", "--runs", "0", "--out", str(tmp_path)]) == 1
    assert main(["mc-sweep", "--method", "nope", "--out", str(tmp_path)]) == 1


def test_lap_solve_swap_fixture(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("lap:\n  costs: [[0.11, 0.01], [0.01, 0.11]]\n")
    assert main(["lap-solve", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert "perm = [2, 1]" in capsys.readouterr().out
    assert json.loads((tmp_path / "lap-solve.json").read_text())["assignment"] == [2, 1]


def test_lap_solve_matrix_file(tmp_path, capsys):
    m = tmp_path / "m.csv"
    m.write_text("0.05,1.01\n0.31,0.05\n")
    assert main(["lap-solve", "--matrix", str(m), "--out", str(tmp_path)]) == 0
    assert "perm = [1, 2]" in capsys.readouterr().out
    assert main(["lap-solve", "--out", str(tmp_path)]) == 1


@pytest.mark.parametrize("exc", [NumericalError("ill-conditioned"), ScenarioError("degenerate"),
                                 np.linalg.LinAlgError("not positive definite")])
def test_numerical_failure_exit_2(tmp_path, monkeypatch, exc):
    def boom(*args, **kwargs):
        raise exc
    monkeypatch.setattr(cli, "optimizer_trace", boom)
    assert main(["optimizer-trace", "--out", str(tmp_path)]) == 2
    assert not (tmp_path / "optimizer-trace.json").exists()


def test_other_commands_with_plots(tmp_path, capsys):
    for cmd in ("motivating", "realization-demo", "optimizer-trace"):
        assert main([cmd, "--out", str(tmp_path), "--plot"]) == 0
    out = capsys.readouterr().out
    assert "fusion-optimal angle: 90 deg" in out
    assert "seed 0): assignment [2, 1] -> incorrect" in out
    names = {p.name for p in tmp_path.iterdir()}
    assert {"motivating.csv", "motivating.png", "realization_demo.csv",
            "optimizer_trace.csv", "optimizer_trace.png", "realization_demo.png"} <= names


def test_run_command_manifest(tmp_path):
    m = RunManifest("motivating", output_dir=tmp_path / "sub")
    assert run_command(m) == 0
    assert (tmp_path / "sub" / "motivating.csv").exists()


def test_unknown_command_rejected():
    with pytest.raises(SystemExit):
        main(["bogus"])
