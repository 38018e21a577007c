"""A scaled-down version of the stochastic volatility study: bias and
variance of MRV across sample sizes, next to the analytic bias that comes
from the upward IV/(2n) bias of the noise-variance estimate."""

from dataclasses import replace

from mbvol import aggregate, load_preset, make_block_scheme, run_experiment, scheme_constants

cfg = replace(load_preset("table1"), n_grid=(1024, 4096, 16384), repetitions=400)
records = run_experiment(cfg, threads=4)

print(f"{'n':>6} {'bias':>8} {'variance':>9} {'-(nu2/nu1) IV/2n':>17}")
for row in aggregate(records):
    nu1, nu2 = scheme_constants(make_block_scheme(row.n, cfg.c1, cfg.c2))
    iv = sum(r.truth for r in records if r.n == row.n) / cfg.repetitions
    print(f"{row.n:>6} {row.mean:>8.4f} {row.variance:>9.4f} {-nu2 / nu1 * iv / (2 * row.n):>17.4f}")
