"""
Closed-form constants of the modulated bipower asymptotics.

Everything here is a pure function of its arguments. The block-variance
routine is a brute-force double sum and serves as the reference that the
closed forms (and the estimators' finite-sample constants) are checked
against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class BiasConstants:
    """Asymptotic variance weights of the diffusion (``nu1``) and noise
    (``nu2``) parts of a rescaled block average, for tuning ``(c1, c2)``."""

    nu1: float
    nu2: float
    c1: float
    c2: float


def _check_c(c1: float, c2: float) -> None:
    if not c1 > 0:
        raise ValueError(f"c1 must be positive, got {c1}")
    if not c2 > 1:
        raise ValueError(
            f"c2 must exceed 1 (block longer than the lag), got {c2}"
        )


def abs_moment(r: float) -> float:
    """Absolute moment ``E|z|^r`` of a standard normal variable.

    Evaluated as ``2^(r/2) Gamma((r+1)/2) / sqrt(pi)`` in log space so large
    powers do not overflow.
    """
    if r < 0:
        raise ValueError(f"moment order must be nonnegative, got {r}")
    if r == 0:
        return 1.0
    log_mu = 0.5 * r * math.log(2.0) + gammaln(0.5 * (r + 1.0)) - 0.5 * math.log(math.pi)
    return float(math.exp(log_mu))


def bias_constants(c1: float, c2: float) -> BiasConstants:
    """Limits of the diffusion and noise variances of ``n^{1/4}`` times a block
    average.

    Parameters
    ----------
    c1 : float
        Lag constant, ``K = c1 sqrt(n)``.
    c2 : float
        Block-to-lag ratio, ``L = c2 K``; must exceed 1.
    """
    _check_c(c1, c2)
    a = c2 - 1.0
    nu1 = c1 * (3.0 * c2 - 4.0 + max((2.0 - c2) ** 3, 0.0)) / (3.0 * a * a)
    nu2 = 2.0 * min(a, 1.0) / (c1 * a * a)
    return BiasConstants(nu1=nu1, nu2=nu2, c1=c1, c2=c2)


def finite_sample_nu1(n: int, c1: float, c2: float) -> float:
    """First-order finite-sample refinement of ``nu1``.

    ``nu1 + ((3 - c2) min 1/(c2 - 1)) / ((c2 - 1) sqrt(n))``, with the
    ``O(1/n)`` remainder dropped.

    Notes
    -----
    The refinement is the second moment of a block average whose K-lag sum
    is divided by ``L - K`` rather than by its ``L - K + 1`` terms, and it is
    only first-order accurate for ``c2 <= 2``. For the block average used in
    :mod:`mbvol.estimators` it over-states the variance by ``O(n^{-1/2})``;
    see :func:`exact_block_variances` for the exact value.
    """
    if n < 4:
        raise ValueError(f"n must be at least 4, got {n}")
    nu1 = bias_constants(c1, c2).nu1
    a = c2 - 1.0
    return nu1 + min(3.0 - c2, 1.0 / a) / (a * math.sqrt(n))


def exact_block_variances(
    K: int, L: int, n: int, omega2: float = 1.0, divisor: float | None = None
) -> tuple[float, float]:
    """Exact variances of ``n^{1/4} W_bar`` and ``n^{1/4} U_bar`` for one block.

    Brute-force double summation over the ``N = L - K + 1`` lagged increments
    of a block: unit-rate Brownian increments (covariance ``(K - |i-j|)^+ / n``)
    and i.i.d. noise with variance ``omega2``.

    Parameters
    ----------
    K, L, n : int
        Lag, block length and grid size, ``1 <= K < L <= n``.
    omega2 : float
        Noise variance.
    divisor : float, optional
        Normaliser of the block sum. Defaults to the number of terms
        ``L - K + 1``.

    Returns
    -------
    (var_w, var_u) : tuple of float
    """
    if not 1 <= K < L <= n:
        raise ValueError(f"need 1 <= K < L <= n, got K={K}, L={L}, n={n}")
    if omega2 < 0:
        raise ValueError(f"omega2 must be nonnegative, got {omega2}")
    N = L - K + 1
    D = float(N if divisor is None else divisor)
    idx = np.arange(N)
    lag = np.abs(idx[:, None] - idx[None, :])
    w_sum = np.maximum(0, K - lag).sum()
    u_sum = (2 * (lag == 0) - (lag == K)).sum()
    var_w = float(w_sum) / (math.sqrt(n) * D * D)
    var_u = math.sqrt(n) * omega2 * float(u_sum) / (D * D)
    return var_w, var_u


def clt_constant_A(powers: Sequence[float]) -> float:
    """Asymptotic variance factor ``A(r_1, ..., r_k)`` of modulated multipower
    variation.

    For ``k = 1`` this is ``mu_{2r} - mu_r^2``; for ``k = 2`` it reduces to
    ``mu_{2r} mu_{2l} + 2 mu_r mu_l mu_{r+l} - 3 mu_r^2 mu_l^2``.
    """
    r = [float(p) for p in powers]
    k = len(r)
    if k == 0:
        raise ValueError("powers must be a nonempty sequence")
    if any(p < 0 for p in r):
        raise ValueError(f"powers must be nonnegative, got {r}")
    mu = abs_moment
    total = math.prod(mu(2 * p) for p in r) - (2 * k - 1) * math.prod(mu(p) ** 2 for p in r)
    for j in range(1, k):
        head = math.prod(mu(r[i]) for i in range(j))
        tail = math.prod(mu(r[i]) for i in range(k - j, k))
        cross = math.prod(mu(r[i] + r[i + j]) for i in range(k - j))
        total += 2.0 * head * tail * cross
    return total


def optimal_constants(omega: float, sigma: float) -> tuple[float, float, float]:
    """Tuning ``(c1, c2)`` minimising the asymptotic variance of the noise-
    corrected IV estimator under constant volatility ``sigma`` and noise
    standard deviation ``omega``.

    Returns ``(c1, c2, min_variance)`` with ``c2 = 8/5``.
    """
    if not omega > 0 or not sigma > 0:
        raise ValueError(f"omega and sigma must be positive, got {omega}, {sigma}")
    c2 = 8.0 / 5.0
    c1 = math.sqrt(18.0 / ((c2 - 1.0) * (4.0 - c2))) * omega / sigma
    min_variance = 256.0 / (3.0 * math.sqrt(18.0)) * sigma**3 * omega
    return c1, c2, min_variance
