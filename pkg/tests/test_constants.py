import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma as gamma_fn

from mbvol import (
    abs_moment,
    bias_constants,
    clt_constant_A,
    exact_block_variances,
    finite_sample_nu1,
    optimal_constants,
)


@pytest.mark.parametrize("r, expected", [(0, 1.0), (2, 1.0), (4, 3.0)])
def test_abs_moment_even_orders(r, expected):
    assert abs_moment(r) == pytest.approx(expected, rel=1e-14)


def test_abs_moment_matches_quadrature(oracle):
    for r, v in oracle["abs_moment"].items():
        assert abs_moment(float(r)) == pytest.approx(v, rel=1e-10)


def test_abs_moment_rejects_negative():
    with pytest.raises(ValueError):
        abs_moment(-1)


def test_abs_moment_large_order_finite():
    assert math.isfinite(abs_moment(200))


@pytest.mark.parametrize("key", ["1,2", "1,8/5", "1/4,2", "1/8,2", "1/2,3/2", "1,3"])
def test_bias_constants_symbolic(oracle, key):
    c1, c2 = (float(eval(x)) for x in key.split(","))
    nu1, nu2 = oracle["bias_constants"][key][:2]
    bc = bias_constants(c1, c2)
    assert bc.nu1 == pytest.approx(nu1, rel=1e-14)
    assert bc.nu2 == pytest.approx(nu2, rel=1e-14)


@pytest.mark.parametrize("c1, c2", [(0, 2), (-1, 2), (1, 1), (1, 0.5)])
def test_bias_constants_domain(c1, c2):
    with pytest.raises(ValueError):
        bias_constants(c1, c2)


@given(st.floats(0.01, 10), st.floats(1.01, 6), st.floats(0.1, 10))
def test_bias_constants_scaling_in_c1(c1, c2, lam):
    a, b = bias_constants(c1, c2), bias_constants(lam * c1, c2)
    assert b.nu1 == pytest.approx(lam * a.nu1, rel=1e-12)
    assert b.nu2 == pytest.approx(a.nu2 / lam, rel=1e-12)


def test_finite_sample_nu1_formula(oracle):
    assert finite_sample_nu1(1024, 0.25, 2) == pytest.approx(
        oracle["finite_sample_nu1_formula_1024"], rel=1e-14
    )


def test_finite_sample_nu1_tends_to_nu1():
    for c2 in (1.5, 2.0, 3.0):
        assert finite_sample_nu1(10**16, 0.5, c2) == pytest.approx(bias_constants(0.5, c2).nu1, rel=1e-7)


def test_finite_sample_nu1_is_first_order_for_alternative_divisor(oracle):
    # agrees to first order with a block sum divided by L - K
    vw, _ = oracle["block_var_K8_L16_n1024_div_LminusK"]
    assert abs(finite_sample_nu1(1024, 0.25, 2) - vw) < 2 / 1024


def test_exact_block_variances_small_case(oracle):
    vw, vu = exact_block_variances(2, 4, 16, omega2=1.0)
    assert vw == pytest.approx(10 / 36, rel=1e-14)
    assert vu == pytest.approx(16 / 9, rel=1e-14)
    assert (vw, vu) == pytest.approx(tuple(oracle["block_var_K2_L4_n16"]), rel=1e-12)
    assert exact_block_variances(2, 4, 16, omega2=0.0)[1] == 0.0


def test_exact_block_variances_against_linalg(oracle):
    for n, (K, L, vw, vu) in oracle["ladder_c1_0.25_c2_2"].items():
        w, u = exact_block_variances(K, L, int(n))
        assert w == pytest.approx(vw, rel=1e-11)
        assert u == pytest.approx(vu, rel=1e-11)


def test_exact_block_variances_divisor(oracle):
    vw, vu = exact_block_variances(8, 16, 1024, divisor=8)
    assert (vw, vu) == pytest.approx(tuple(oracle["block_var_K8_L16_n1024_div_LminusK"]), rel=1e-12)


def test_exact_block_variances_converge(oracle):
    bc = bias_constants(0.25, 2)
    devs = [
        abs(exact_block_variances(K, L, int(n))[0] - bc.nu1)
        for n, (K, L, *_) in sorted(oracle["ladder_c1_0.25_c2_2"].items(), key=lambda kv: int(kv[0]))
    ]
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert devs[-1] < 1e-3


@pytest.mark.parametrize("K, L, n", [(0, 4, 16), (4, 4, 16), (2, 20, 16)])
def test_exact_block_variances_domain(K, L, n):
    with pytest.raises(ValueError):
        exact_block_variances(K, L, n)


def test_clt_constant_A_values(oracle):
    assert clt_constant_A([2]) == pytest.approx(2.0, rel=1e-14)
    assert clt_constant_A([1, 1]) == pytest.approx(oracle["A_1_1"], rel=1e-12)


def _mu(r):
    return 2 ** (r / 2) * gamma_fn((r + 1) / 2) / math.sqrt(math.pi)


def test_clt_constant_A_two_powers_expression():
    rng = np.random.default_rng(7)
    for r, l in rng.uniform(0, 3, size=(10, 2)):
        ref = _mu(2 * r) * _mu(2 * l) + 2 * _mu(r) * _mu(l) * _mu(r + l) - 3 * _mu(r) ** 2 * _mu(l) ** 2
        assert clt_constant_A([r, l]) == pytest.approx(ref, abs=1e-12)


@settings(max_examples=50)
@given(st.lists(st.floats(0, 3), min_size=1, max_size=4))
def test_clt_constant_A_zero_powers_and_positivity(powers):
    # zero powers add nothing at k=1; the variance factor is nonnegative
    assert clt_constant_A(powers) >= -1e-9
    assert clt_constant_A([0.0]) == pytest.approx(0.0, abs=1e-15)


def test_optimal_constants(oracle):
    c1, c2, v = optimal_constants(1.0, 1.0)
    assert (c1, c2, v) == pytest.approx(tuple(oracle["optimal_1_1"]), rel=1e-12)
    assert v == pytest.approx(20.11, abs=0.005)
    assert optimal_constants(0.1, 1.414)[0] == pytest.approx(0.25, abs=5e-5)


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.1, 10))
def test_optimal_constants_linear_in_omega(omega, sigma, lam):
    assert optimal_constants(lam * omega, sigma)[0] == pytest.approx(lam * optimal_constants(omega, sigma)[0], rel=1e-12)
