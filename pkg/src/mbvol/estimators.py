"""
Modulated bipower and multipower variation and the estimators built on them.

Observations ``Y_{i/n}``, ``i = 0..n``, are cut into ``M`` blocks of ``L``
ticks. Inside block ``m`` the ``L - K + 1`` lag-``K`` increments are averaged::

    Ybar_m = 1/(L-K+1) * sum_{i=(m-1)L}^{mL-K} (Y_{(i+K)/n} - Y_{i/n})

and the statistics are normalised power sums of ``|Ybar_m|``. Trailing
observations beyond ``M L`` are ignored.

Bias corrections need the variances of the diffusion and noise parts of
``n^{1/4} Ybar_m``. Three sources are supported through the ``constants``
argument:

``"exact"`` (default)
    exact finite-sample block variances for the realised ``(K, L, n)``;
``"formula"``
    the closed-form ``nu1`` refinement of :func:`finite_sample_nu1` with the
    asymptotic ``nu2``;
``"asymptotic"``
    the limits from :func:`bias_constants`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .constants import abs_moment, bias_constants, clt_constant_A, finite_sample_nu1
from .errors import ConfigurationError, UndefinedStatisticError
from .simulate import Observations

CONSTANT_MODES = ("exact", "formula", "asymptotic")


@dataclass(frozen=True)
class BlockScheme:
    """Block geometry for a grid of size ``n``.

    ``c1_eff = K / n^{1/2 + gamma}`` and ``c2_eff = n / (M K)`` are the
    constants implied by the rounded integers and replace the requested ones
    in every formula.
    """

    n: int
    K: int
    M: int
    L: int
    c1_eff: float
    c2_eff: float
    gamma: float = 0.0

    @property
    def terms(self) -> int:
        """Number of lagged increments averaged per block."""
        return self.L - self.K + 1


@dataclass(frozen=True)
class Estimate:
    value: float
    scheme: BlockScheme
    omega2_hat: float
    feasible_variance: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None


def _build_scheme(n: int, K: int, c2: float, gamma: float, c1: float) -> BlockScheme:
    M = max(1, int(math.floor(n / (c2 * K))))
    L = n // M
    if not K < L:
        raise ConfigurationError(
            f"block scheme invalid for n={n}, c1={c1}, c2={c2}"
            f"{f', gamma={gamma}' if gamma else ''}: lag K={K} is not below block length L={L}"
        )
    c1_eff = K / n ** (0.5 + gamma)
    c2_eff = n / (M * K)
    return BlockScheme(n=n, K=K, M=M, L=L, c1_eff=c1_eff, c2_eff=c2_eff, gamma=gamma)


def make_block_scheme(n: int, c1: float, c2: float) -> BlockScheme:
    """``K = round(c1 sqrt(n))``, ``M = floor(n / (c2 K))``, ``L = floor(n / M)``."""
    if n < 16:
        raise ConfigurationError(f"n must be at least 16, got {n}")
    if not c1 > 0 or not c2 > 1:
        raise ConfigurationError(f"need c1 > 0 and c2 > 1, got c1={c1}, c2={c2}")
    K = max(1, int(round(c1 * math.sqrt(n))))
    return _build_scheme(n, K, c2, 0.0, c1)


def make_gamma_scheme(n: int, c1: float, c2: float, gamma: float) -> BlockScheme:
    """Lag ``K = round(c1 n^{1/2 + gamma})``, under which the diffusion part of
    the block averages dominates the noise."""
    if not 0 < gamma < 0.5:
        raise ValueError(f"gamma must lie in (0, 1/2), got {gamma}")
    if n < 16:
        raise ConfigurationError(f"n must be at least 16, got {n}")
    if not c1 > 0 or not c2 > 1:
        raise ConfigurationError(f"need c1 > 0 and c2 > 1, got c1={c1}, c2={c2}")
    K = max(1, int(round(c1 * n ** (0.5 + gamma))))
    return _build_scheme(n, K, c2, gamma, c1)


def _values(obs) -> np.ndarray:
    if isinstance(obs, Observations):
        return obs.y
    return np.asarray(obs, dtype=float)


def _checked(obs, scheme: BlockScheme) -> np.ndarray:
    y = _values(obs)
    if len(y) != scheme.n + 1:
        raise ConfigurationError(
            f"scheme built for n={scheme.n} but got {len(y)} observations"
        )
    return y


def block_averages(obs, scheme: BlockScheme) -> np.ndarray:
    """All ``M`` block averages in O(n) via a prefix sum of lag-K increments."""
    y = _checked(obs, scheme)
    K, L, M = scheme.K, scheme.L, scheme.M
    inc = y[K:] - y[:-K]
    csum = np.concatenate(([0.0], np.cumsum(inc)))
    starts = np.arange(M) * L
    return (csum[starts + L - K + 1] - csum[starts]) / (L - K + 1)


def block_average(obs, scheme: BlockScheme, m: int) -> float:
    """Block average of block ``m`` (1-based)."""
    if not 1 <= m <= scheme.M:
        raise IndexError(f"block index {m} outside 1..{scheme.M}")
    y = _checked(obs, scheme)
    K, L = scheme.K, scheme.L
    lo = (m - 1) * L
    hi = m * L - K  # inclusive
    return float((y[lo + K : hi + K + 1] - y[lo : hi + 1]).sum() / (L - K + 1))


def _power_sum(avg: np.ndarray, powers: Sequence[float]) -> float:
    k = len(powers)
    count = len(avg) - k + 1
    a = np.abs(avg)
    prod = a[:count] ** powers[0]
    for j in range(1, k):
        prod = prod * a[j : j + count] ** powers[j]
    return float(prod.sum())


def mmv(obs, powers: Sequence[float], scheme: BlockScheme) -> float:
    """Modulated multipower variation

    ``n^{r+/4 - 1/2} sum_{m=1}^{M-k+1} prod_j |Ybar_{m+j-1}|^{r_j}``.
    """
    powers = [float(p) for p in powers]
    if not powers or any(p < 0 for p in powers):
        raise ValueError(f"powers must be a nonempty list of nonnegative reals, got {powers}")
    if len(powers) > scheme.M:
        raise ConfigurationError(f"{len(powers)} powers but only M={scheme.M} blocks")
    if scheme.gamma:
        raise ConfigurationError("gamma scheme given; use mmv_gamma")
    avg = block_averages(obs, scheme)
    return scheme.n ** (sum(powers) / 4.0 - 0.5) * _power_sum(avg, powers)


def mbv(obs, r: float, l: float, scheme: BlockScheme) -> float:
    """Modulated bipower variation ``MBV(Y, r, l)``.

    Sums over ``m = 1..M`` when ``l == 0`` and ``m = 1..M-1`` otherwise, so
    it coincides with :func:`mmv` for ``[r]`` or ``[r, l]``.
    """
    return mmv(obs, [r] if l == 0 else [r, l], scheme)


def mmv_gamma(obs, powers: Sequence[float], scheme: BlockScheme) -> float:
    """Multipower variation under a ``gamma > 0`` scheme.

    Normalised by ``n^{(1-2 gamma)(r+/4 - 1/2)}``; its limit is
    ``prod mu_{r_j} nu1^{r+/2} / (c1 c2) * int |sigma|^{r+}`` with no noise
    term.
    """
    if not scheme.gamma > 0:
        raise ConfigurationError("mmv_gamma needs a scheme with gamma > 0; use mmv")
    powers = [float(p) for p in powers]
    if not powers or any(p < 0 for p in powers):
        raise ValueError(f"powers must be a nonempty list of nonnegative reals, got {powers}")
    if len(powers) > scheme.M:
        raise ConfigurationError(f"{len(powers)} powers but only M={scheme.M} blocks")
    avg = block_averages(obs, scheme)
    expo = (1.0 - 2.0 * scheme.gamma) * (sum(powers) / 4.0 - 0.5)
    return scheme.n**expo * _power_sum(avg, powers)


def omega_hat(obs) -> float:
    """Noise variance estimate ``sum (Delta Y)^2 / (2n)``."""
    y = _values(obs)
    n = len(y) - 1
    if n < 1:
        raise ValueError("need at least two observations")
    d = np.diff(y)
    return float(d @ d / (2.0 * n))


@lru_cache(maxsize=256)
def _exact_nus(K: int, L: int, n: int) -> tuple[float, float]:
    # O(N) diagonal form of the double sums in constants.exact_block_variances
    N = L - K + 1
    d = np.arange(-(N - 1), N)
    w_sum = float(((N - np.abs(d)) * np.maximum(0, K - np.abs(d))).sum())
    u_sum = 2.0 * N - 2.0 * max(0, N - K)
    return w_sum / (math.sqrt(n) * N * N), math.sqrt(n) * u_sum / (N * N)


def scheme_constants(scheme: BlockScheme, constants: str = "exact") -> tuple[float, float]:
    """``(nu1, nu2)`` used by the bias corrections for ``scheme``."""
    if constants == "exact":
        return _exact_nus(scheme.K, scheme.L, scheme.n)
    bc = bias_constants(scheme.c1_eff, scheme.c2_eff)
    if constants == "formula":
        return finite_sample_nu1(scheme.n, scheme.c1_eff, scheme.c2_eff), bc.nu2
    if constants == "asymptotic":
        return bc.nu1, bc.nu2
    raise ConfigurationError(f"constants must be one of {CONSTANT_MODES}, got {constants!r}")


def _scale(scheme: BlockScheme) -> float:
    # c1_eff * c2_eff == sqrt(n) / M
    return scheme.c1_eff * scheme.c2_eff


def _floor(est: Estimate) -> Estimate:
    lo = None if est.ci_low is None else max(est.ci_low, 0.0)
    hi = None if est.ci_high is None else max(est.ci_high, 0.0)
    return replace(est, value=max(est.value, 0.0), ci_low=lo, ci_high=hi)


def _mrv_value(obs, scheme, constants, w2):
    nu1, nu2 = scheme_constants(scheme, constants)
    return (_scale(scheme) * mbv(obs, 2, 0, scheme) - nu2 * w2) / nu1


def feasible_variance(obs, scheme: BlockScheme, constants: str = "exact") -> float:
    """Consistent estimate ``beta_n^2 = 2 (c1 c2)^2 / (3 nu1^2) MBV(Y, 4, 0)``
    of the conditional variance of ``n^{1/4}(MRV - IV)``."""
    nu1, _ = scheme_constants(scheme, constants)
    return 2.0 * _scale(scheme) ** 2 / (3.0 * nu1 * nu1) * mbv(obs, 4, 0, scheme)


def confidence_interval(est: Estimate, n: int | None = None, level: float = 0.95) -> tuple[float, float]:
    """Two-sided normal interval ``value -/+ z beta_n / n^{1/4}``."""
    if est.feasible_variance is None:
        raise ConfigurationError("estimate carries no feasible variance")
    if not 0 <= level < 1:
        raise ValueError(f"level must lie in [0, 1), got {level}")
    n = est.scheme.n if n is None else n
    half = norm.ppf(0.5 + level / 2.0) * math.sqrt(est.feasible_variance) / n**0.25
    return est.value - half, est.value + half


def mrv(
    obs,
    scheme: BlockScheme,
    constants: str = "exact",
    level: float | None = None,
    floor_zero: bool = False,
) -> Estimate:
    """Modulated realised volatility, a noise-robust estimate of integrated
    volatility.

    ``(c1 c2 MBV(Y, 2, 0) - nu2 omega_hat^2) / nu1``. The result carries the
    feasible variance ``beta_n^2`` and, when ``level`` is given, a confidence
    interval.

    Parameters
    ----------
    obs : Observations or array_like
        ``n + 1`` observations.
    scheme : BlockScheme
        Block geometry for ``n``.
    constants : {"exact", "formula", "asymptotic"}
        Source of ``(nu1, nu2)``.
    level : float, optional
        Confidence level of the interval.
    floor_zero : bool
        Truncate the value (and interval) at zero.
    """
    w2 = omega_hat(obs)
    value = _mrv_value(obs, scheme, constants, w2)
    est = Estimate(
        value=value,
        scheme=scheme,
        omega2_hat=w2,
        feasible_variance=feasible_variance(obs, scheme, constants),
    )
    if level is not None:
        lo, hi = confidence_interval(est, scheme.n, level)
        est = replace(est, ci_low=lo, ci_high=hi)
    return _floor(est) if floor_zero else est


def mrq(obs, scheme: BlockScheme, constants: str = "exact", floor_zero: bool = False) -> Estimate:
    """Modulated realised quarticity, an estimate of integrated quarticity::

        ((c1 c2 / 3) MBV(Y, 4, 0) - 2 nu1 nu2 w MRV - nu2^2 w^2) / nu1^2

    with ``w = omega_hat^2``.
    """
    nu1, nu2 = scheme_constants(scheme, constants)
    w2 = omega_hat(obs)
    iv = _mrv_value(obs, scheme, constants, w2)
    value = (
        _scale(scheme) / 3.0 * mbv(obs, 4, 0, scheme)
        - 2.0 * nu1 * nu2 * w2 * iv
        - nu2 * nu2 * w2 * w2
    ) / (nu1 * nu1)
    est = Estimate(value=value, scheme=scheme, omega2_hat=w2)
    return _floor(est) if floor_zero else est


def _robust_iv(obs, scheme, constants, w2):
    nu1, nu2 = scheme_constants(scheme, constants)
    mu1 = abs_moment(1.0)
    return (_scale(scheme) / mu1**2 * mbv(obs, 1, 1, scheme) - nu2 * w2) / nu1


def mbv_robust(
    obs,
    scheme: BlockScheme,
    constants: str = "exact",
    level: float | None = None,
    floor_zero: bool = False,
) -> Estimate:
    """Jump-robust IV estimate from ``MBV(Z, 1, 1)``.

    The feasible variance uses the asymptotic factor ``A(1, 1) / mu_1^4`` and
    estimates ``int (nu1 sigma^2 + nu2 omega^2)^2`` by the jump-robust
    quadpower ``c1 c2 MMV(Z, 1, 1, 1, 1) / mu_1^4``.
    """
    nu1, _ = scheme_constants(scheme, constants)
    w2 = omega_hat(obs)
    value = _robust_iv(obs, scheme, constants, w2)
    fv = None
    if scheme.M >= 4:
        mu1_4 = abs_moment(1.0) ** 4
        s = _scale(scheme)
        fv = s * clt_constant_A([1, 1]) / (mu1_4 * nu1**2) * s * mmv(obs, [1, 1, 1, 1], scheme) / mu1_4
    est = Estimate(value=value, scheme=scheme, omega2_hat=w2, feasible_variance=fv)
    if level is not None and fv is not None:
        lo, hi = confidence_interval(est, scheme.n, level)
        est = replace(est, ci_low=lo, ci_high=hi)
    return _floor(est) if floor_zero else est


def mtq(obs, scheme: BlockScheme, constants: str = "exact", floor_zero: bool = False) -> Estimate:
    """Jump-robust tripower quarticity estimate built on ``MMV(Z, 4/3, 4/3, 4/3)``."""
    nu1, nu2 = scheme_constants(scheme, constants)
    w2 = omega_hat(obs)
    iv = _robust_iv(obs, scheme, constants, w2)
    p = 4.0 / 3.0
    value = (
        _scale(scheme) / abs_moment(p) ** 3 * mmv(obs, [p, p, p], scheme)
        - 2.0 * nu1 * nu2 * w2 * iv
        - nu2 * nu2 * w2 * w2
    ) / (nu1 * nu1)
    est = Estimate(value=value, scheme=scheme, omega2_hat=w2)
    return _floor(est) if floor_zero else est


def standardized_iv_stat(
    obs,
    scheme: BlockScheme,
    iv_ref: float,
    log_form: bool = False,
    constants: str = "exact",
) -> float:
    """Studentised IV error ``n^{1/4} (MRV - iv_ref) / beta_n``.

    With ``log_form`` the delta-method version
    ``n^{1/4} (log MRV - log iv_ref) / (beta_n / MRV)`` is returned.

    Raises
    ------
    UndefinedStatisticError
        If ``beta_n`` is zero, or (log form) ``MRV`` or ``iv_ref`` is not positive.
    """
    est = mrv(obs, scheme, constants)
    beta2 = est.feasible_variance
    if not beta2 > 0:
        raise UndefinedStatisticError("feasible variance is zero")
    beta = math.sqrt(beta2)
    q = scheme.n**0.25
    if not log_form:
        return q * (est.value - iv_ref) / beta
    if not est.value > 0 or not iv_ref > 0:
        raise UndefinedStatisticError(f"log statistic undefined for MRV={est.value:.6g}")
    return q * (math.log(est.value) - math.log(iv_ref)) / (beta / est.value)
