"""A single price jump: squared block averages absorb it, bipower products
largely do not. Paired paths share every random draw except the jump."""

import numpy as np

from mbvol import (
    SVModelParams,
    add_jumps,
    add_noise,
    make_block_scheme,
    mbv_robust,
    mix_seed,
    mrv,
    mtq,
    mrq,
    simulate_sv_path,
)

n, omega2, reps = 16384, 0.001, 200
scheme = make_block_scheme(n, c1=0.125, c2=2.0)

shifts = {"mrv": [], "mbv_robust": [], "mrq": [], "mtq": []}
for r in range(reps):
    path = simulate_sv_path(SVModelParams(), n, mix_seed(7, r, 0))
    clean = add_noise(path, omega2, mix_seed(7, r, 1))
    jumped = add_jumps(clean, count=1, h=0.25, seed=mix_seed(7, r, 2))
    for name, fn in (("mrv", mrv), ("mbv_robust", mbv_robust), ("mrq", mrq), ("mtq", mtq)):
        shifts[name].append(fn(jumped, scheme).value - fn(clean, scheme).value)

print(f"mean jump-induced shift over {reps} paired paths (jump sd 0.25):")
for name, d in shifts.items():
    d = np.asarray(d)
    print(f"  {name:11s} {d.mean():+.4f}  (se {d.std(ddof=1) / np.sqrt(reps):.4f})")
print("IV estimators: mrv picks up roughly E[s^2]; mbv_robust only a vanishing fraction.")
print("IQ estimators: mrq explodes with s^4 sqrt(n); mtq moves by O(n^-1/6).")
