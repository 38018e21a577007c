"""
Monte Carlo harness for the finite-sample experiments.

Repetition ``j`` at grid size ``n`` is driven by ``mix_seed(base_seed, n, j)``,
so records do not depend on thread count or execution order, and doubling
the repetition count reproduces the first half exactly. Within a repetition
the latent path, the noise and the jumps use the sub-seeds
``mix_seed(rep_seed, 0)``, ``(.., 1)`` and ``(.., 2)``.
"""

from __future__ import annotations

import configparser
import csv
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import estimators as est
from .constants import abs_moment, bias_constants
from .errors import ConfigurationError, UndefinedStatisticError
from .simulate import (
    SVModelParams,
    add_jumps,
    add_noise,
    simulate_constant_vol_path,
    simulate_sv_path,
)

MASK64 = 0xFFFFFFFFFFFFFFFF
BASE_ESTIMATORS = ("mrv", "mrq", "mbv_robust", "mtq", "standardized", "standardized_log")
_RAW = re.compile(r"^mbv_raw\(\s*([0-9.eE+-]+)\s*,\s*([0-9.eE+-]+)\s*\)$")


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed with the SplitMix64 finaliser:
    ``h <- splitmix64(h ^ part)`` for each part, starting from ``h = 0``."""
    h = 0
    for p in parts:
        h = _splitmix64(h ^ (int(p) & MASK64))
    return h


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "sv"
    n_grid: tuple[int, ...] = (4096,)
    omega2: float = 0.01
    c1: float = 0.25
    c2: float = 2.0
    gamma: float | None = None
    jumps: tuple[int, float] | None = None
    # "sd": sizes N(0, h^2); "variance": sizes N(0, h)
    jump_scale: str = "sd"
    estimators: tuple[str, ...] = ("mrv",)
    repetitions: int = 2000
    base_seed: int = 42
    constants: str = "exact"
    sv_params: SVModelParams = field(default_factory=SVModelParams)
    drift: float = 0.03  # constant-volatility model only

    def __post_init__(self):
        if self.model not in ("sv", "constant_vol"):
            raise ConfigurationError(f"model must be 'sv' or 'constant_vol', got {self.model!r}")
        if not self.n_grid:
            raise ConfigurationError("n_grid must be nonempty")
        if self.repetitions < 1:
            raise ConfigurationError(f"repetitions must be at least 1, got {self.repetitions}")
        if self.omega2 < 0:
            raise ConfigurationError(f"omega2 must be nonnegative, got {self.omega2}")
        if self.jump_scale not in ("sd", "variance"):
            raise ConfigurationError(f"jump_scale must be 'sd' or 'variance', got {self.jump_scale!r}")
        if self.constants not in est.CONSTANT_MODES:
            raise ConfigurationError(f"constants must be one of {est.CONSTANT_MODES}")
        if not self.estimators:
            raise ConfigurationError("no estimators requested")
        for name in self.estimators:
            parse_estimator(name)

    @property
    def jump_sd(self) -> float | None:
        if self.jumps is None:
            return None
        h = self.jumps[1]
        return math.sqrt(h) if self.jump_scale == "variance" else h


@dataclass(frozen=True)
class Record:
    n: int
    rep: int
    estimator: str
    value: float
    truth: float
    failed: bool = False

    @property
    def error(self) -> float:
        return self.value - self.truth


@dataclass(frozen=True)
class ResultRow:
    n: int
    estimator: str
    mean: float
    variance: float
    reps: int
    failures: int


def parse_estimator(name: str) -> tuple[str, tuple[float, float] | None]:
    if name in BASE_ESTIMATORS:
        return name, None
    m = _RAW.match(name)
    if m:
        return "mbv_raw", (float(m.group(1)), float(m.group(2)))
    raise ConfigurationError(
        f"unknown estimator {name!r}; expected one of {BASE_ESTIMATORS} or mbv_raw(r,l)"
    )


def _raw_limit(path, omega2, scheme, constants, r, l) -> float:
    if scheme.gamma:
        # no noise term, asymptotic nu1 only
        nu1 = bias_constants(scheme.c1_eff, scheme.c2_eff).nu1
        inner = np.mean(np.abs(path.sigma[:-1]) ** (r + l)) * nu1 ** ((r + l) / 2.0)
        return abs_moment(r) * abs_moment(l) / (scheme.c1_eff * scheme.c2_eff) * float(inner)
    nu1, nu2 = est.scheme_constants(scheme, constants)
    s2 = path.sigma[:-1] ** 2
    inner = np.mean((nu1 * s2 + nu2 * omega2) ** ((r + l) / 2.0))
    return abs_moment(r) * abs_moment(l) / (scheme.c1_eff * scheme.c2_eff) * float(inner)


def simulate_observations(cfg: ExperimentConfig, n: int, rep: int):
    """The noisy (and possibly jumpy) series of repetition ``rep``."""
    seed = mix_seed(cfg.base_seed, n, rep)
    if cfg.model == "sv":
        path = simulate_sv_path(cfg.sv_params, n, mix_seed(seed, 0))
    else:
        path = simulate_constant_vol_path(cfg.drift, n, mix_seed(seed, 0))
    obs = add_noise(path, cfg.omega2, mix_seed(seed, 1))
    if cfg.jumps is not None:
        obs = add_jumps(obs, cfg.jumps[0], cfg.jump_sd, mix_seed(seed, 2))
    return obs


def _one_rep(cfg: ExperimentConfig, n: int, rep: int, scheme) -> list[Record]:
    obs = simulate_observations(cfg, n, rep)
    path = obs.path
    out = []
    for name in cfg.estimators:
        kind, rl = parse_estimator(name)
        failed = False
        if kind == "mrv":
            value, truth = est.mrv(obs, scheme, cfg.constants).value, path.iv
        elif kind == "mbv_robust":
            value, truth = est.mbv_robust(obs, scheme, cfg.constants).value, path.iv
        elif kind == "mrq":
            value, truth = est.mrq(obs, scheme, cfg.constants).value, path.iq
        elif kind == "mtq":
            value, truth = est.mtq(obs, scheme, cfg.constants).value, path.iq
        elif kind == "mbv_raw":
            r, l = rl
            powers = [r] if l == 0 else [r, l]
            value = est.mmv_gamma(obs, powers, scheme) if scheme.gamma else est.mbv(obs, r, l, scheme)
            truth = _raw_limit(path, cfg.omega2, scheme, cfg.constants, r, l)
        else:
            truth = 0.0
            try:
                value = est.standardized_iv_stat(
                    obs, scheme, path.iv, log_form=kind == "standardized_log", constants=cfg.constants
                )
            except UndefinedStatisticError:
                value, failed = math.nan, True
        out.append(Record(n=n, rep=rep, estimator=name, value=float(value), truth=float(truth), failed=failed))
    return out


def _scheme_for(cfg: ExperimentConfig, n: int):
    try:
        if cfg.gamma:
            return est.make_gamma_scheme(n, cfg.c1, cfg.c2, cfg.gamma)
        return est.make_block_scheme(n, cfg.c1, cfg.c2)
    except (ConfigurationError, ValueError) as exc:
        raise ConfigurationError(f"cannot build block scheme for n={n}, c1={cfg.c1}, c2={cfg.c2}: {exc}") from exc


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list[Record]:
    """Simulate and evaluate every (n, repetition) cell of ``cfg``.

    Records come back sorted by ``(n, rep)`` in grid order with estimators in
    configuration order, whatever the number of ``threads``.
    """
    schemes = {n: _scheme_for(cfg, n) for n in cfg.n_grid}
    if cfg.gamma and any(parse_estimator(e)[0] != "mbv_raw" for e in cfg.estimators):
        raise ConfigurationError("gamma schemes support only mbv_raw(r,l) estimators")
    tasks = [(n, j) for n in cfg.n_grid for j in range(cfg.repetitions)]

    def work(task):
        n, j = task
        return _one_rep(cfg, n, j, schemes[n])

    if threads <= 1:
        chunks = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, tasks, chunksize=16))
    return [r for chunk in chunks for r in chunk]


def aggregate(records: Iterable[Record]) -> list[ResultRow]:
    """Mean and unbiased variance of ``estimate - truth`` per ``(n, estimator)``.

    Failed repetitions are excluded and counted. A cell in which every
    repetition failed has ``nan`` mean and variance and ``reps == 0``.
    """
    groups: dict[tuple[int, str], list[Record]] = {}
    for r in records:
        groups.setdefault((r.n, r.estimator), []).append(r)
    if not groups:
        raise ValueError("no records to aggregate")
    rows = []
    for (n, name) in sorted(groups):
        cell = sorted(groups[(n, name)], key=lambda r: r.rep)
        errs = np.array([r.error for r in cell if not r.failed])
        failures = len(cell) - len(errs)
        if len(errs) == 0:
            mean = var = math.nan
        else:
            mean = float(errs.mean())
            var = float(errs.var(ddof=1)) if len(errs) > 1 else 0.0
        rows.append(ResultRow(n=n, estimator=name, mean=mean, variance=var, reps=len(errs), failures=failures))
    return rows


@dataclass(frozen=True)
class Histogram:
    n: int
    statistic: str
    reps: np.ndarray
    values: np.ndarray
    failures: int


def histogram_export(records: Sequence[Record], statistic: str, n: int | None = None) -> Histogram:
    """Raw standardised values of ``statistic``, one per successful repetition."""
    chosen = [r for r in records if r.estimator == statistic]
    if not chosen:
        raise ConfigurationError(f"statistic {statistic!r} not present in the records")
    grid = sorted({r.n for r in chosen})
    if n is None:
        if len(grid) > 1:
            raise ConfigurationError(f"records cover n={grid}; pass n explicitly")
        n = grid[0]
    chosen = sorted((r for r in chosen if r.n == n), key=lambda r: r.rep)
    if not chosen:
        raise ConfigurationError(f"no records for n={n}")
    ok = [r for r in chosen if not r.failed]
    return Histogram(
        n=n,
        statistic=statistic,
        reps=np.array([r.rep for r in ok], dtype=int),
        values=np.array([r.value for r in ok]),
        failures=len(chosen) - len(ok),
    )


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.17g}"


def write_results_csv(rows: Sequence[ResultRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "estimator", "mean", "variance", "reps", "failures"])
        for r in rows:
            w.writerow([r.n, r.estimator, _fmt(r.mean), _fmt(r.variance), r.reps, r.failures])


def write_histogram_csv(hist: Histogram, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rep", "value"])
        for j, v in zip(hist.reps, hist.values):
            w.writerow([int(j), _fmt(float(v))])


# -- configuration files ---------------------------------------------------

PRESETS = (
    "table1",
    "table1_low_noise",
    "table2",
    "table2_low_noise",
    "table2_small_jump",
    "table3",
    "table3_low_noise",
    "figure1",
    "figure1_low_noise",
)


def _floats(text: str) -> list[float]:
    return [float(t) for t in re.split(r"[,\s]+", text.strip()) if t]


def config_from_parser(cp: configparser.ConfigParser) -> ExperimentConfig:
    if not cp.has_section("experiment"):
        raise ConfigurationError("configuration needs an [experiment] section")
    e = cp["experiment"]
    kw: dict = {}
    try:
        if "model" in e:
            kw["model"] = e["model"].strip()
        if "n_grid" in e:
            kw["n_grid"] = tuple(int(v) for v in _floats(e["n_grid"]))
        for key in ("omega2", "c1", "c2", "drift"):
            if key in e:
                kw[key] = e.getfloat(key)
        if "gamma" in e and e["gamma"].strip():
            kw["gamma"] = e.getfloat("gamma")
        if "estimators" in e:
            kw["estimators"] = tuple(s.strip() for s in re.split(r";|,(?![^()]*\))", e["estimators"]) if s.strip())
        if "repetitions" in e:
            kw["repetitions"] = e.getint("repetitions")
        if "base_seed" in e:
            kw["base_seed"] = e.getint("base_seed")
        if "constants" in e:
            kw["constants"] = e["constants"].strip()
        if cp.has_section("jumps"):
            j = cp["jumps"]
            kw["jumps"] = (j.getint("count", 1), j.getfloat("h"))
            kw["jump_scale"] = j.get("scale", "sd").strip()
        if cp.has_section("sv"):
            names = {f.name for f in fields(SVModelParams)}
            unknown = set(cp["sv"]) - names
            if unknown:
                raise ConfigurationError(f"unknown [sv] keys: {sorted(unknown)}")
            kw["sv_params"] = SVModelParams(**{k: cp["sv"].getfloat(k) for k in cp["sv"]})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"bad configuration value: {exc}") from exc
    return ExperimentConfig(**kw)


def load_config(path: str | Path) -> ExperimentConfig:
    """Read an INI-style experiment description (see the shipped presets)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigurationError(f"cannot read configuration {path}: {exc}") from exc
    return config_from_parser(cp)


def load_preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.read_string(resources.files("mbvol.presets").joinpath(f"{name}.ini").read_text())
    return config_from_parser(cp)
