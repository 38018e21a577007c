"""
Synthetic high-frequency data: Euler paths of a log-OU stochastic volatility
diffusion (or a constant-volatility one), i.i.d. Gaussian microstructure noise
and finite-activity jumps.

Every generator takes an integer ``seed`` and draws from
``numpy.random.Generator(numpy.random.Philox(seed))``. Philox-4x64 is a
counter-based generator, so a path is a pure function of its inputs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.signal import lfilter


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SVModelParams:
    """Parameters of ``dX = mu dt + sigma_t dW``, ``sigma_t = exp(beta0 +
    beta1 tau_t)``, ``dtau = alpha tau dt + dB``, ``corr(dW, dB) = rho``.

    Defaults are the benchmark values used in the Monte Carlo study.
    """

    mu: float = 0.03
    beta0: float = 0.3125
    beta1: float = 0.125
    alpha: float = -0.025
    rho: float = -0.3
    tau0: float = 0.0

    def __post_init__(self):
        if abs(self.rho) > 1:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")


@dataclass(frozen=True)
class SimPath:
    """Latent log-price path on the grid ``i/n`` with its spot volatility and
    the Riemann-sum integrated volatility and quarticity."""

    n: int
    x: np.ndarray
    sigma: np.ndarray
    iv: float
    iq: float


@dataclass(frozen=True)
class Observations:
    """``n + 1`` equidistant observations ``y`` on [0, 1].

    ``jumps`` lists ``(arrival_index, size)`` pairs; ``path`` keeps the latent
    path for simulated data (``None`` for real data).
    """

    n: int
    y: np.ndarray
    noise_omega2: float = 0.0
    jumps: tuple[tuple[int, float], ...] = ()
    path: SimPath | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.y) != self.n + 1:
            raise ValueError(f"expected {self.n + 1} observations, got {len(self.y)}")
        for a, _ in self.jumps:
            if not 0 <= a <= self.n:
                raise ValueError(f"jump index {a} outside [0, {self.n}]")

    @classmethod
    def from_array(cls, y, noise_omega2: float = 0.0) -> "Observations":
        y = _frozen(y)
        return cls(n=len(y) - 1, y=y, noise_omega2=noise_omega2)


def _finish_path(n: int, substeps: int, x_fine, sigma_fine) -> SimPath:
    # truth uses the full simulation grid; observations are every substeps-th point
    s2 = sigma_fine[:-1] ** 2
    iv = float(s2.mean())
    iq = float((s2 * s2).mean())
    return SimPath(
        n=n,
        x=_frozen(x_fine[::substeps]),
        sigma=_frozen(sigma_fine[::substeps]),
        iv=iv,
        iq=iq,
    )


def simulate_sv_path(
    params: SVModelParams, n: int, seed: int, substeps: int = 1
) -> SimPath:
    """Euler scheme for the log-OU stochastic volatility model.

    With ``N = n * substeps`` steps of size ``1/N``::

        tau_{i+1} = tau_i + alpha tau_i / N + dB_i
        X_{i+1}   = X_i + mu / N + sigma_i dW_i,   sigma_i = exp(beta0 + beta1 tau_i)

    where ``dB = rho dW + sqrt(1 - rho^2) dW_perp``. ``X_0 = 0``.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if substeps < 1:
        raise ValueError(f"substeps must be positive, got {substeps}")
    N = n * substeps
    rng = make_rng(seed)
    scale = 1.0 / math.sqrt(N)
    dW = rng.standard_normal(N) * scale
    dW_perp = rng.standard_normal(N) * scale
    dB = params.rho * dW + math.sqrt(1.0 - params.rho**2) * dW_perp

    phi = 1.0 + params.alpha / N
    tau = np.empty(N + 1)
    tau[0] = params.tau0
    tau[1:] = lfilter([1.0], [1.0, -phi], dB, zi=[phi * params.tau0])[0]
    sigma = np.exp(params.beta0 + params.beta1 * tau)

    x = np.empty(N + 1)
    x[0] = 0.0
    np.cumsum(params.mu / N + sigma[:-1] * dW, out=x[1:])
    return _finish_path(n, substeps, x, sigma)


def simulate_constant_vol_path(mu: float, n: int, seed: int) -> SimPath:
    """``dX = mu dt + dW`` on the grid ``i/n``; ``iv = iq = 1``."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    rng = make_rng(seed)
    dW = rng.standard_normal(n) / math.sqrt(n)
    x = np.empty(n + 1)
    x[0] = 0.0
    np.cumsum(mu / n + dW, out=x[1:])
    return SimPath(n=n, x=_frozen(x), sigma=_frozen(np.ones(n + 1)), iv=1.0, iq=1.0)


def add_noise(path: SimPath, omega2: float, seed: int) -> Observations:
    """Observe ``path`` with i.i.d. ``N(0, omega2)`` errors."""
    if omega2 < 0:
        raise ValueError(f"omega2 must be nonnegative, got {omega2}")
    if omega2 == 0:
        y = path.x
    else:
        u = make_rng(seed).standard_normal(path.n + 1) * math.sqrt(omega2)
        y = _frozen(path.x + u)
    return Observations(n=path.n, y=y, noise_omega2=omega2, path=path)


def add_jumps(obs: Observations, count: int, h: float, seed: int) -> Observations:
    """Superimpose ``count`` jumps with uniform arrival times and
    ``N(0, h^2)`` sizes.

    A jump arriving at ``u`` lands at index ``a = ceil(u n)`` and shifts every
    ``y_i`` with ``i >= a``.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    rng = make_rng(seed)
    y = np.array(obs.y, dtype=float)
    jumps = list(obs.jumps)
    for _ in range(count):
        a = int(math.ceil(rng.uniform() * obs.n))
        s = float(rng.standard_normal() * h)
        y[a:] += s
        jumps.append((a, s))
    return replace(obs, y=_frozen(y), jumps=tuple(jumps))


def write_path_csv(obs: Observations, path: str | Path) -> None:
    """Dump ``i,t,x,sigma,y`` rows, one per grid point, 17 significant digits.

    ``x`` and ``sigma`` are left empty when ``obs`` carries no latent path.
    """
    sim = obs.path
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "t", "x", "sigma", "y"])
        for i in range(obs.n + 1):
            x = f"{sim.x[i]:.17g}" if sim is not None else ""
            s = f"{sim.sigma[i]:.17g}" if sim is not None else ""
            w.writerow([i, f"{i / obs.n:.17g}", x, s, f"{obs.y[i]:.17g}"])
