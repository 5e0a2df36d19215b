import json
import subprocess
import sys

import numpy as np
import pytest

from reweigh.cli import EXIT_INPUT, EXIT_OK, EXIT_PROMISE, main, read_points, write_points


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def data(tmp_path):
    path = tmp_path / "x.csv"
    code = main(["generate", "--generator", "gaussian", "--n", "300", "--d", "4", "--eps", "0.1",
                 "--shift", "30", "--seed", "3", "--out", str(path)])
    assert code == EXIT_OK
    return path


def test_points_round_trip(tmp_path, rng):
    x = rng.normal(size=(7, 3)) * 1e-7
    write_points(tmp_path / "p.csv", x)
    np.testing.assert_array_equal(read_points(tmp_path / "p.csv"), x)


def test_generate_writes_sidecar(data):
    side = json.loads((data.parent / "x.csv.json").read_text())
    assert len(side["labels"]) == 300 and sum(not b for b in side["labels"]) == 30
    assert side["seed"] == 3 and side["generator"]["corruption"]["shift"] == 30.0


def test_generate_planted_has_witness(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["generate", "--generator", "planted", "--n", "100", "--d", "3", "--eps", "0.1",
                 "--out", str(out)]) == EXIT_OK
    assert "witness" in json.loads((tmp_path / "p.csv.json").read_text())


def test_estimate_report(data, capsys):
    code, out, _ = run(["estimate", "--input", str(data), "--algo", "mwu", "--seed", "1"], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert set(rep) == {"algo", "estimate", "iterations", "seconds", "spectral_norm", "error_vs_truth"}
    assert rep["error_vs_truth"] < 1.0 and len(rep["estimate"]) == 4


def test_estimate_heavy_tailed(tmp_path, capsys):
    path = tmp_path / "t.csv"
    main(["generate", "--generator", "student-t", "--n", "2000", "--d", "3", "--out", str(path)])
    code, out, _ = run(["estimate", "--input", str(path), "--heavy-tailed", "--delta", "0.05",
                        "--no-timing"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["seconds"] is None


def test_certify_report(data, capsys):
    code, out, _ = run(["certify", "--input", str(data), "--lam", "4", "--eps", "0.2",
                        "--draws", "100", "--seed", "0"], capsys)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["verdict"] in {"inconclusive", "falsified"}
    assert rep["worst_fraction"] >= 0.1  # the cluster sits 30 away along e1


def test_certify_planar(tmp_path, capsys):
    path = tmp_path / "p.csv"
    main(["generate", "--n", "200", "--d", "2", "--seed", "1", "--out", str(path)])
    code, out, _ = run(["certify", "--input", str(path), "--lam", "9", "--eps", "0.1"], capsys)
    assert code == EXIT_OK and json.loads(out)["verdict"] == "certified-2d"


def test_bench_csv(capsys):
    code, out, _ = run(["bench", "--n", "200", "--d", "3", "--levels", "0.05,0.1", "--trials", "3",
                        "--shift", "20", "--no-timing"], capsys)
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == "trial,algo,level,error,iterations,seconds"
    assert len(lines) == 1 + 6 + 4
    assert lines[-1].startswith("p95,mwu,0.1,")
    assert all(line.endswith(",") for line in lines[1:])


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    code, _, err = run(["estimate", "--input", str(bad)], capsys)
    assert code == EXIT_INPUT and "line 2" in err
    bad.write_text("1,nan\n")
    assert run(["estimate", "--input", str(bad)], capsys)[0] == EXIT_INPUT
    assert run(["estimate", "--input", str(tmp_path / "missing.csv")], capsys)[0] == EXIT_INPUT
    assert run(["estimate"], capsys)[0] == EXIT_INPUT
    assert run(["bogus"], capsys)[0] == EXIT_INPUT


def test_bad_seed_env(data, capsys, monkeypatch):
    monkeypatch.setenv("REWEIGH_SEED", "abc")
    assert run(["estimate", "--input", str(data)], capsys)[0] == EXIT_INPUT


def test_promise_violation_exit(data, capsys):
    code, _, err = run(["estimate", "--input", str(data), "--algo", "mmw", "--lam", "1e-6",
                        "--max-iter", "1"], capsys)
    assert code == EXIT_PROMISE
    assert err.startswith("error: prune failed")


def test_module_entry_point(data):
    res = subprocess.run([sys.executable, "-m", "reweigh.cli", "estimate", "--input", str(data),
                          "--no-timing"], capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["seconds"] is None


def test_single_trial_bench_matches_estimate(tmp_path, capsys):
    path = tmp_path / "b.csv"
    main(["generate", "--n", "300", "--d", "4", "--eps", "0.1", "--shift", "20", "--seed", "11",
          "--out", str(path)])
    _, out, _ = run(["estimate", "--input", str(path), "--eps", "0.1", "--seed", "11", "--no-timing"], capsys)
    rep = json.loads(out)
    _, table, _ = run(["bench", "--n", "300", "--d", "4", "--levels", "0.1", "--trials", "1",
                       "--shift", "20", "--seed", "11", "--no-timing"], capsys)
    row = table.splitlines()[1].split(",")
    assert float(row[3]) == rep["error_vs_truth"]
    assert int(row[4]) == rep["iterations"]


def test_bench_error_grows_with_eps(capsys):
    # the sub-gaussian filter accepts every level here; the breakdown filter's stopping guard
    # leaves a 2% cluster untouched, so its error is not monotone in eps
    _, table, _ = run(["bench", "--algo", "subg", "--n", "400", "--d", "5", "--shift", "20",
                       "--levels", "0.02,0.05,0.1,0.2", "--trials", "50", "--no-timing"], capsys)
    medians = [float(line.split(",")[3]) for line in table.splitlines() if line.startswith("median")]
    assert len(medians) == 4
    assert all(a <= b for a, b in zip(medians, medians[1:]))


@pytest.mark.parametrize("algo,bound", [("mwu", 60 * 2.0), ("gd", 24 * 2.0)])
def test_planted_spectral_norm_within_bound(tmp_path, capsys, algo, bound):
    path = tmp_path / "p.csv"
    main(["generate", "--generator", "planted", "--n", "400", "--d", "10", "--eps", "0.1", "--seed", "2",
          "--out", str(path)])
    _, out, _ = run(["estimate", "--input", str(path), "--algo", algo, "--no-timing"], capsys)
    rep = json.loads(out)
    assert rep["spectral_norm"] <= bound


def test_certify_far_center_is_falsified(tmp_path, capsys):
    path = tmp_path / "c.csv"
    main(["generate", "--n", "200", "--d", "3", "--seed", "4", "--out", str(path)])
    _, out, _ = run(["certify", "--input", str(path), "--center", "8,0,0", "--lam", "1",
                     "--draws", "200"], capsys)
    rep = json.loads(out)
    assert rep["verdict"] == "falsified"
    assert abs(np.linalg.norm(rep["worst_direction"]) - 1) < 1e-12
    assert set(rep) == {"center", "lam", "eps", "verdict", "worst_fraction", "worst_direction",
                        "spectral_objective"}
