"""From irregular ticks to an estimate: write a tick file, read it back,
sample it onto an equidistant grid and estimate the day's volatility."""

import tempfile
from pathlib import Path

import numpy as np

from mbvol import load_ticks, make_block_scheme, mbv_robust, mrv, regularize

rng = np.random.default_rng(11)

# 40000 ticks at random times over a 6.5 hour session, log price with daily vol 0.02
n_ticks = 40000
t = np.sort(rng.uniform(0, 6.5 * 3600, n_ticks))
dt = np.diff(t, prepend=0.0) / t[-1]
log_p = np.log(100.0) + np.cumsum(0.02 * np.sqrt(dt) * rng.standard_normal(n_ticks))
price = np.exp(log_p + 1e-4 * rng.standard_normal(n_ticks))  # quote noise
print(f"true integrated volatility  {0.02**2:.3e}")

with tempfile.TemporaryDirectory() as tmp:
    f = Path(tmp) / "ticks.csv"
    np.savetxt(f, np.column_stack([t, price]), delimiter=",", header="t,price", comments="", fmt="%.10f")
    ticks = load_ticks(f)

n = 23400  # one grid point per second
obs = regularize(ticks, n)  # previous-tick sampling of log prices
scheme = make_block_scheme(n, c1=0.25, c2=2.0)
est = mrv(obs, scheme, level=0.95)
print(f"MRV                         {est.value:.3e}  95% CI [{est.ci_low:.3e}, {est.ci_high:.3e}]")
print(f"jump-robust estimate        {mbv_robust(obs, scheme).value:.3e}")
print(f"noise variance estimate     {est.omega2_hat:.3e}")
