import math

import numpy as np
import pytest

from mbvol import (
    Observations,
    SVModelParams,
    add_jumps,
    add_noise,
    make_rng,
    simulate_constant_vol_path,
    simulate_sv_path,
)
from mbvol.simulate import write_path_csv


def test_sv_constant_volatility_case():
    p = SVModelParams(mu=0.0, beta1=0.0)
    path = simulate_sv_path(p, 512, seed=3)
    assert np.all(path.sigma == math.exp(p.beta0))
    assert path.iv == pytest.approx(math.exp(2 * p.beta0), rel=1e-14)
    assert path.iq == pytest.approx(math.exp(4 * p.beta0), rel=1e-14)


def test_sv_mean_iv_about_two():
    ivs = [simulate_sv_path(SVModelParams(), 1024, seed=s).iv for s in range(1000)]
    assert np.mean(ivs) == pytest.approx(2.0, abs=0.3)


def test_sv_deterministic():
    a = simulate_sv_path(SVModelParams(), 256, seed=11)
    b = simulate_sv_path(SVModelParams(), 256, seed=11)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.sigma, b.sigma)
    assert a.iv == b.iv and a.iq == b.iq


def test_sv_substeps_keep_grid():
    path = simulate_sv_path(SVModelParams(), 128, seed=1, substeps=4)
    assert len(path.x) == 129 and path.x[0] == 0.0


def test_sv_rejects_bad_rho():
    with pytest.raises(ValueError):
        SVModelParams(rho=1.5)


def test_constant_vol_truth_and_increments():
    path = simulate_constant_vol_path(0.0, 4, seed=5)
    assert path.iv == 1.0 and path.iq == 1.0
    np.testing.assert_array_equal(np.diff(path.x), make_rng(5).standard_normal(4) / 2.0)


def test_constant_vol_seeds_differ():
    a = simulate_constant_vol_path(0.03, 64, seed=1)
    b = simulate_constant_vol_path(0.03, 64, seed=2)
    assert not np.array_equal(a.x, b.x)


def test_paths_are_read_only():
    path = simulate_constant_vol_path(0.0, 16, seed=0)
    with pytest.raises(ValueError):
        path.x[0] = 1.0


def test_add_noise_zero_is_identity():
    path = simulate_constant_vol_path(0.0, 64, seed=0)
    obs = add_noise(path, 0.0, seed=1)
    assert np.array_equal(obs.y, path.x)


def test_add_noise_variance():
    path = simulate_constant_vol_path(0.0, 25600, seed=0)
    u = add_noise(path, 0.01, seed=1).y - path.x
    assert np.var(u, ddof=1) == pytest.approx(0.01, rel=0.05)


def test_add_noise_rejects_negative():
    with pytest.raises(ValueError):
        add_noise(simulate_constant_vol_path(0.0, 16, 0), -1.0, 0)


def test_add_jumps_step_function():
    obs = Observations.from_array(np.zeros(101))
    jumped = add_jumps(obs, 1, 0.25, seed=9)
    (a, s), = jumped.jumps
    assert 0 <= a <= 100
    assert np.all(jumped.y[:a] == 0.0)
    assert np.all(jumped.y[a:] == s)


def test_add_jumps_size_variance():
    obs = Observations.from_array(np.zeros(17))
    sizes = [add_jumps(obs, 1, 0.25, seed=s).jumps[0][1] for s in range(4000)]
    assert np.var(sizes) == pytest.approx(0.0625, rel=0.1)


def test_add_jumps_count_zero_disallowed():
    with pytest.raises(ValueError):
        add_jumps(Observations.from_array(np.zeros(17)), 0, 0.25, 0)


def test_observations_length_check():
    with pytest.raises(ValueError):
        Observations(n=4, y=np.zeros(4))


def test_write_path_csv(tmp_path):
    obs = add_noise(simulate_sv_path(SVModelParams(), 32, seed=2), 0.01, seed=3)
    out = tmp_path / "p.csv"
    write_path_csv(obs, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "i,t,x,sigma,y" and len(lines) == 34
    y = np.loadtxt(out, delimiter=",", skiprows=1, usecols=4)
    assert np.array_equal(y, obs.y)
