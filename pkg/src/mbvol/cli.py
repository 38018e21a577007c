"""Command line entry point: ``mbvol {simulate,estimate,montecarlo,constants}``."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import constants as C
from . import estimators as est
from . import experiments as ex
from .errors import ConfigurationError, LoadError, UndefinedStatisticError
from .io import load_ticks, regularize
from .simulate import (
    SVModelParams,
    add_jumps,
    add_noise,
    simulate_constant_vol_path,
    simulate_sv_path,
    write_path_csv,
)

log = logging.getLogger("mbvol")

ESTIMATE_CHOICES = ("mrv", "mrq", "mbv_robust", "mtq")
CONSTANT_FLAGS = {"exact": "exact", "formula": "formula", "off": "asymptotic"}


def _fmt(x) -> str:
    if x is None:
        return ""
    return "nan" if math.isnan(x) else f"{x:.17g}"


def cmd_simulate(args) -> int:
    from .experiments import mix_seed

    if args.model == "sv":
        path = simulate_sv_path(SVModelParams(tau0=args.tau0), args.n, mix_seed(args.seed, 0), substeps=args.substeps)
    else:
        path = simulate_constant_vol_path(args.mu, args.n, mix_seed(args.seed, 0))
    obs = add_noise(path, args.omega2, mix_seed(args.seed, 1))
    if args.jumps:
        obs = add_jumps(obs, args.jumps, args.h, mix_seed(args.seed, 2))
    out = args.out or sys.stdout
    if out is sys.stdout:
        write_path_csv(obs, "/dev/stdout")
    else:
        write_path_csv(obs, out)
    log.info("iv=%.6g iq=%.6g jumps=%s", path.iv, path.iq, list(obs.jumps))
    return 0


def _estimate_rows(obs, args):
    mode = CONSTANT_FLAGS[args.finite_sample_nu1]
    names = args.estimator or ["mrv"]
    if "all" in names:
        names = list(ESTIMATE_CHOICES)
    rows = []
    if args.gamma is not None:
        scheme = est.make_gamma_scheme(obs.n, args.c1, args.c2, args.gamma)
        nu1 = C.bias_constants(scheme.c1_eff, scheme.c2_eff).nu1
        value = scheme.c1_eff * scheme.c2_eff * est.mmv_gamma(obs, [2], scheme) / nu1
        if args.floor_zero:
            value = max(value, 0.0)
        rows.append(("iv_gamma", value, None, None, None, est.omega_hat(obs), scheme))
        return rows
    scheme = est.make_block_scheme(obs.n, args.c1, args.c2)
    for name in names:
        if name in ("mrv", "mbv_robust"):
            fn = est.mrv if name == "mrv" else est.mbv_robust
            e = fn(obs, scheme, mode, level=args.level, floor_zero=args.floor_zero)
        else:
            fn = est.mrq if name == "mrq" else est.mtq
            e = fn(obs, scheme, mode, floor_zero=args.floor_zero)
        rows.append((name, e.value, e.feasible_variance, e.ci_low, e.ci_high, e.omega2_hat, scheme))
    return rows


def cmd_estimate(args) -> int:
    ticks = load_ticks(args.input, args.time_col, args.price_col, require_positive=args.transform == "log")
    n = args.n or len(ticks.timestamps) - 1
    obs = regularize(ticks, n, args.transform)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["estimator", "value", "feasible_variance", "ci_low", "ci_high", "omega2_hat", "n", "K", "M", "L"])
    for name, value, fv, lo, hi, w2, s in _estimate_rows(obs, args):
        w.writerow([name, _fmt(value), _fmt(fv), _fmt(lo), _fmt(hi), _fmt(w2), s.n, s.K, s.M, s.L])
    return 0


def cmd_montecarlo(args) -> int:
    if args.config:
        cfg = ex.load_config(args.config)
    else:
        cfg = ex.load_preset(args.preset)
    overrides = {}
    if args.reps is not None:
        overrides["repetitions"] = args.reps
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.n:
        overrides["n_grid"] = tuple(args.n)
    cfg = replace(cfg, **overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = ex.run_experiment(cfg, threads=args.threads)
    ex.write_results_csv(ex.aggregate(records), out / "results.csv")
    for name in cfg.estimators:
        if name.startswith("standardized"):
            for n in cfg.n_grid:
                hist = ex.histogram_export(records, name, n)
                ex.write_histogram_csv(hist, out / f"histogram_{name}_n{n}.csv")
                if hist.failures:
                    log.warning("%s at n=%d: %d repetitions dropped", name, n, hist.failures)
    log.info("wrote %s", out / "results.csv")
    return 0


def cmd_constants(args) -> int:
    lines = []
    for r in args.moments:
        lines.append(f"mu_{r:g} = {C.abs_moment(r):.10g}")
    if args.c1 is not None and args.c2 is not None:
        bc = C.bias_constants(args.c1, args.c2)
        lines.append(f"nu1 = {bc.nu1:.10g}")
        lines.append(f"nu2 = {bc.nu2:.10g}")
        if args.n is not None:
            lines.append(f"nu1_n = {C.finite_sample_nu1(args.n, args.c1, args.c2):.10g}")
            scheme = est.make_block_scheme(args.n, args.c1, args.c2)
            e1, e2 = est.scheme_constants(scheme, "exact")
            lines.append(f"scheme K={scheme.K} M={scheme.M} L={scheme.L}")
            lines.append(f"nu1_exact = {e1:.10g}")
            lines.append(f"nu2_exact = {e2:.10g}")
    if args.powers:
        label = ",".join(f"{p:g}" for p in args.powers)
        lines.append(f"A({label}) = {C.clt_constant_A(args.powers):.10g}")
    if args.omega is not None and args.sigma is not None:
        c1, c2, v = C.optimal_constants(args.omega, args.sigma)
        lines.append(f"optimal c1 = {c1:.10g}")
        lines.append(f"optimal c2 = {c2:.10g}")
        lines.append(f"min variance = {v:.10g}")
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mbvol", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a simulated path/observations CSV")
    s.add_argument("--model", choices=("sv", "constant_vol"), default="sv")
    s.add_argument("--n", type=int, default=4096)
    s.add_argument("--omega2", type=float, default=0.01)
    s.add_argument("--mu", type=float, default=0.03, help="drift of the constant-volatility model")
    s.add_argument("--tau0", type=float, default=0.0)
    s.add_argument("--substeps", type=int, default=1)
    s.add_argument("--jumps", type=int, default=0, help="number of jumps (0 for none)")
    s.add_argument("--h", type=float, default=0.25, help="jump size standard deviation")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="estimate IV/IQ from a tick CSV")
    e.add_argument("input")
    e.add_argument("--time-col", default="t")
    e.add_argument("--price-col", default="price")
    e.add_argument("--transform", choices=("log", "raw"), default="log")
    e.add_argument("--n", type=int, help="grid size (default: ticks - 1)")
    e.add_argument("--c1", type=float, default=0.25)
    e.add_argument("--c2", type=float, default=2.0)
    e.add_argument("--gamma", type=float)
    e.add_argument("--estimator", action="append", choices=ESTIMATE_CHOICES + ("all",))
    e.add_argument("--level", type=float, default=0.95)
    e.add_argument("--floor-zero", action="store_true")
    e.add_argument("--finite-sample-nu1", choices=tuple(CONSTANT_FLAGS), default="exact",
                   help="bias constants: exact block moments, the closed-form nu1 refinement, or asymptotic")
    e.set_defaults(func=cmd_estimate)

    m = sub.add_parser("montecarlo", help="run a Monte Carlo experiment")
    src = m.add_mutually_exclusive_group(required=True)
    src.add_argument("--config")
    src.add_argument("--preset", choices=ex.PRESETS)
    m.add_argument("--reps", type=int)
    m.add_argument("--seed", type=int)
    m.add_argument("--n", type=int, action="append", help="override the grid (repeatable)")
    m.add_argument("--threads", type=int, default=1)
    m.add_argument("--out", default="mc_out")
    m.set_defaults(func=cmd_montecarlo)

    c = sub.add_parser("constants", help="print asymptotic constants")
    c.add_argument("--c1", type=float)
    c.add_argument("--c2", type=float)
    c.add_argument("--n", type=int)
    c.add_argument("--moments", type=float, nargs="*", default=[])
    c.add_argument("--powers", type=float, nargs="*")
    c.add_argument("--omega", type=float)
    c.add_argument("--sigma", type=float)
    c.set_defaults(func=cmd_constants)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigurationError, LoadError, UndefinedStatisticError, ValueError, OSError) as exc:
        print(f"mbvol: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
