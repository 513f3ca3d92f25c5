import csv
import hashlib
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from coldstandby import __version__, montecarlo
from coldstandby.cli import main

from conftest import erlang_cdf


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_solve_initial_row(tmp_path):
    out = tmp_path / "solve.csv"
    assert main(["solve", "--n", "2", "--lambda", "1", "--mu", "10", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["t", "P_0", "P_1", "cdf", "density"]
    assert [float(v) for v in rows[0]] == [0.0, 1.0, 0.0, 0.0, 0.0]
    assert len(rows) == 401
    manifest = json.loads((tmp_path / "solve.csv.manifest.json").read_text())
    assert manifest["output_checksum"] == "sha256:" + hashlib.sha256(out.read_bytes()).hexdigest()
    assert manifest["version"] == __version__ and manifest["command"] == "solve"


def test_solve_erlang_to_stdout(capsys):
    assert main(["solve", "--n", "2", "--lambda", "1", "--mu", "0", "--t-max", "12", "--points", "97"]) == 0
    lines = capsys.readouterr().out.splitlines()
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert data.shape == (97, 5)
    np.testing.assert_allclose(data[:, 3], erlang_cdf(2, 1.0, data[:, 0]), atol=1e-8)


def test_floats_round_trip(tmp_path):
    out = tmp_path / "s.csv"
    main(["solve", "--n", "3", "--lambda", "0.7", "--mu", "3.3", "--points", "5", "--out", str(out)])
    _, rows = read_csv(out)
    assert all(repr(float(v)) == repr(float(format(float(v), ".17g"))) for row in rows for v in row)


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["solve", "--n", "1", "--lambda", "1", "--mu", "1"], "n must be >= 2"),
        (["solve", "--n", "2", "--lambda", "0", "--mu", "1"], "lambda"),
        (["solve", "--n", "2", "--lambda", "1", "--mu", "-1"], "mu"),
        (["solve", "--lambda", "1", "--mu", "1"], "--n"),
        (["solve", "--n", "2", "--lambda", "1", "--mu", "1", "--tol", "0.1"], "tol"),
    ],
)
def test_validation_exit_code(argv, needle, capsys):
    assert main(argv) == 2
    assert needle in capsys.readouterr().err


def test_laplace_normalization(capsys):
    assert main(["laplace", "--n", "2", "--lambda", "1", "--mu", "10", "--s", "0"]) == 0
    header, row = [line.split(",") for line in capsys.readouterr().out.splitlines()]
    assert header == ["s", "phi_0", "phi_1", "lst_tau", "q1", "q2"]
    assert float(row[header.index("lst_tau")]) == 1.0


def test_laplace_value(capsys):
    assert main(["laplace", "--n", "2", "--lambda", "1", "--mu", "10", "--s", "1"]) == 0
    header, row = [line.split(",") for line in capsys.readouterr().out.splitlines()]
    assert float(row[header.index("phi_1")]) == pytest.approx(1.0 / 14.0, rel=1e-15)


def test_laplace_both_methods(capsys):
    assert main(["laplace", "--n", "5", "--lambda", "1", "--mu", "3", "--s", "0,0.5,2", "--method", "both"]) == 0
    lines = capsys.readouterr().out.splitlines()
    header = lines[0].split(",")
    assert header[-1] == "max_rel_discrepancy"
    for line in lines[1:]:
        row = line.split(",")
        assert float(row[-1]) < 1e-10
        assert float(row[header.index("q1")]) >= float(row[header.index("q2")])


def test_laplace_degenerate_exit_code(capsys):
    assert main(["laplace", "--n", "4", "--lambda", "1", "--mu", "1", "--s", "0", "--method", "closed"]) == 3
    assert "DegenerateRoots" in capsys.readouterr().err


def test_laplace_negative_s(capsys):
    assert main(["laplace", "--n", "2", "--lambda", "1", "--mu", "1", "--s", "-1"]) == 2


def _simulate(tmp_path, name, *extra):
    out = tmp_path / f"{name}.csv"
    argv = ["simulate", "--n", "2", "--lambda", "1", "--mu", "10", "--trials", "2000", "--seed", "42", "--out", str(out)]
    assert main(argv + list(extra)) == 0
    return out, tmp_path / f"{name}.summary.json"


def test_simulate_files_are_reproducible(tmp_path):
    a, sa = _simulate(tmp_path, "a")
    b, sb = _simulate(tmp_path, "b")
    assert a.read_bytes() == b.read_bytes()
    assert sa.read_bytes() == sb.read_bytes()
    header, rows = read_csv(a)
    assert header == ["trial_index", "tau"] and len(rows) == 2000
    summary = json.loads(sa.read_text())
    assert summary["manifest"]["seed"] == 42
    assert summary["manifest"]["output_checksum"] == "sha256:" + hashlib.sha256(a.read_bytes()).hexdigest()
    assert "out" not in summary["manifest"]["parameters"]


def test_simulate_mean(tmp_path):
    out = tmp_path / "m.csv"
    argv = ["simulate", "--n", "2", "--lambda", "1", "--mu", "10", "--trials", "100000", "--seed", "42"]
    assert main(argv + ["--out", str(out)]) == 0
    summary = json.loads((tmp_path / "m.summary.json").read_text())
    se = (summary["variance"] / summary["trials"]) ** 0.5
    assert abs(summary["mean"] - 12.0) < 3 * se
    assert summary["ks_vs_analytic"] < 1.36 / 100000**0.5


def test_simulate_zero_trials(tmp_path):
    argv = ["simulate", "--n", "2", "--lambda", "1", "--mu", "10", "--trials", "0", "--out", str(tmp_path / "x.csv")]
    assert main(argv) == 2


def test_event_budget_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(montecarlo, "EVENT_BUDGET", 3)
    argv = ["simulate", "--n", "3", "--lambda", "1", "--mu", "100", "--trials", "50", "--out", str(tmp_path / "x.csv")]
    assert main(argv) == 4
    assert "consistency" in capsys.readouterr().err


def test_converge(tmp_path):
    out = tmp_path / "conv.json"
    argv = ["converge", "--n", "3", "--lambda", "1", "--mu", "10,100,1000", "--trials", "100000", "--seed", "7"]
    assert main(argv + ["--out", str(out)]) == 0
    body = json.loads(out.read_text())
    errors = [r["lst_sup_error"] for r in body["results"]]
    assert errors[0] > errors[1] > errors[2]
    assert body["manifest"]["seed"] == 7 and body["manifest"]["version"] == __version__
    header, rows = read_csv(tmp_path / "conv.csv")
    assert header == ["t", "limit_cdf", "cdf_mu=10", "cdf_mu=100", "cdf_mu=1000"]
    assert len(rows) == 400


def test_converge_requires_small_epsilon(tmp_path, capsys):
    argv = ["converge", "--n", "2", "--mu", "0.5", "--lambda", "1", "--trials", "10", "--out", str(tmp_path / "c.json")]
    assert main(argv) == 2
    assert "epsilon" in capsys.readouterr().err


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# system\nn = 2\nlambda = 1\nmu = 10\ns = 1\n")
    assert main(["--config", str(cfg), "laplace"]) == 0
    header, row = [line.split(",") for line in capsys.readouterr().out.splitlines()]
    assert float(row[header.index("phi_1")]) == pytest.approx(1.0 / 14.0)
    # flags override the file
    assert main(["--config", str(cfg), "laplace", "--s", "0"]) == 0
    header, row = [line.split(",") for line in capsys.readouterr().out.splitlines()]
    assert float(row[header.index("lst_tau")]) == 1.0


def test_config_file_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 2\ncolour = red\n")
    assert main(["--config", str(cfg), "laplace"]) == 2
    cfg.write_text("n 2\n")
    assert main(["--config", str(cfg), "laplace"]) == 2
    assert main(["--config", str(tmp_path / "missing.cfg"), "laplace"]) == 2


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["laplace", "--n", "2", "--lambda", "1", "--mu", "1", "--method", "magic"])
    assert exc.value.code == 2


def test_simulate_identical_across_thread_counts(tmp_path):
    env = dict(os.environ, NUMBA_NUM_THREADS="4")
    outputs = []
    for threads in ("1", "4"):
        out = tmp_path / f"t{threads}.csv"
        cmd = [sys.executable, "-m", "coldstandby", "simulate", "--n", "3", "--lambda", "1", "--mu", "5",
               "--trials", "20000", "--seed", "3", "--threads", threads, "--out", str(out)]
        subprocess.run(cmd, check=True, env=env)
        outputs.append((out.read_bytes(), (tmp_path / f"t{threads}.summary.json").read_bytes()))
    assert outputs[0] == outputs[1]
