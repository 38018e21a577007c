import csv
import io
import sys
from contextlib import redirect_stdout

import numpy as np
import pytest

from mbvol import Observations, add_noise, make_block_scheme, mbv_robust, mix_seed, mrq, mrv, mtq, simulate_constant_vol_path
from mbvol.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_constants_prints_bias_constants(capsys):
    code, out, _ = run(["constants", "--c1", "1", "--c2", "1.6"], capsys)
    assert code == 0
    vals = dict(line.split(" = ") for line in out.strip().splitlines())
    assert float(vals["nu1"]) == pytest.approx(0.8) and float(vals["nu2"]) == pytest.approx(3.3333, abs=1e-4)


def test_constants_everything(capsys):
    code, out, _ = run(["constants", "--c1", "0.25", "--c2", "2", "--n", "1024", "--moments", "1", "4",
                        "--powers", "1", "1", "--omega", "1", "--sigma", "1"], capsys)
    assert code == 0
    for key in ("mu_1 = 0.797884", "mu_4 = 3", "nu1_n = 0.197916", "nu1_exact", "A(1,1) = 1.05738", "optimal c2 = 1.6", "min variance = 20.11"):
        assert key in out


def test_constants_bad_input_exit_code(capsys):
    code, out, err = run(["constants", "--c1", "1", "--c2", "0.5"], capsys)
    assert code != 0 and "error" in err and out == ""


def test_simulate_roundtrip_matches_library(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--model", "sv", "--n", "1024", "--omega2", "0.01", "--seed", "5", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1025 and list(rows[0]) == ["i", "t", "x", "sigma", "y"]
    y = np.array([float(r["y"]) for r in rows])
    code, text, _ = run(["estimate", str(out), "--price-col", "y", "--transform", "raw", "--estimator", "all", "--level", "0.9"], capsys)
    assert code == 0
    est = {r["estimator"]: r for r in csv.DictReader(io.StringIO(text))}
    s = make_block_scheme(1024, 0.25, 2)
    obs = Observations.from_array(y)
    assert float(est["mrv"]["value"]) == mrv(obs, s).value
    assert float(est["mrq"]["value"]) == mrq(obs, s).value
    assert float(est["mbv_robust"]["value"]) == mbv_robust(obs, s).value
    assert float(est["mtq"]["value"]) == mtq(obs, s).value
    lo, hi = float(est["mrv"]["ci_low"]), float(est["mrv"]["ci_high"])
    assert lo < float(est["mrv"]["value"]) < hi


def test_simulate_with_jumps(tmp_path):
    out = tmp_path / "j.csv"
    assert main(["simulate", "--model", "constant_vol", "--n", "256", "--jumps", "1", "--seed", "1", "--out", str(out)]) == 0
    assert sum(1 for _ in out.open()) == 258


def test_estimate_noiseless_unit_vol_near_one(tmp_path, capsys):
    n = 16384
    path = simulate_constant_vol_path(0.0, n, mix_seed(3, 0))
    f = tmp_path / "ticks.csv"
    np.savetxt(f, np.column_stack([np.arange(n + 1), path.x]), delimiter=",", header="t,price", comments="", fmt="%.17g")
    code, text, _ = run(["estimate", str(f), "--transform", "raw", "--c1", "0.5"], capsys)
    assert code == 0
    row = next(csv.DictReader(io.StringIO(text)))
    sd = float(row["feasible_variance"]) ** 0.5 / n**0.25
    assert abs(float(row["value"]) - 1.0) < 3 * sd


def test_estimate_options(tmp_path, capsys):
    n = 4096
    obs = add_noise(simulate_constant_vol_path(0.0, n, 1), 0.01, 2)
    f = tmp_path / "ticks.csv"
    np.savetxt(f, np.column_stack([np.arange(n + 1), obs.y]), delimiter=",", header="t,price", comments="", fmt="%.17g")
    for extra in (["--gamma", "0.25"], ["--finite-sample-nu1", "formula"], ["--finite-sample-nu1", "off", "--floor-zero"]):
        code, text, err = run(["estimate", str(f), "--transform", "raw"] + extra, capsys)
        assert code == 0, err
        assert float(next(csv.DictReader(io.StringIO(text)))["value"]) > 0


def test_estimate_load_error(tmp_path, capsys):
    f = tmp_path / "bad.csv"
    f.write_text("t,price\n0,1\n0,2\n")
    code, out, err = run(["estimate", str(f)], capsys)
    assert code != 0 and ":3:" in err


def test_montecarlo_deterministic_across_threads(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["montecarlo", "--preset", "figure1", "--reps", "20", "--seed", "7", "--n", "1024"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--threads", "3", "--out", str(b)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["histogram_standardized_log_n1024.csv", "histogram_standardized_n1024.csv", "results.csv"]
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_montecarlo_config_file(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[experiment]\nn_grid = 256\nestimators = mrv\nrepetitions = 4\n")
    assert main(["montecarlo", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "results.csv").read_text().count("\n") == 2


def test_montecarlo_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[experiment]\nmodel = nope\n")
    code, _, err = run(["montecarlo", "--config", str(cfg), "--out", str(tmp_path / "o")], capsys)
    assert code != 0 and "model" in err
