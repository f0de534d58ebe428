# %% [markdown]
# How loose are the error bounds?
#
# Discrepancy first: the explicit Halton bound against the exact star
# discrepancy, then the Koksma-Hlawka product against an observed error.

# %%
import math

import numpy as np

from qmclik import (crossover, gaussian_conjugate, halton, halton_bound_explicit, hk_variation_bound,
                    estimate_normalizer, kh_error_bound, make_region, mc_error_rate, qmc_error_rate,
                    star_discrepancy_exact, truncated_normalizer_oracle)

for p in (1, 2, 3):
    for m in (16, 64):
        exact = star_discrepancy_exact(halton(m, p)).value
        bound = halton_bound_explicit(m, p).value
        print(f"p={p} m={m:3d}  D*={exact:.4f}  bound={bound:9.2f}  ratio={bound / exact:8.1f}")

# %%
model = gaussian_conjugate(np.random.default_rng(3).standard_normal((32, 2)))
region = make_region(model, "high_dim")
oracle = math.exp(truncated_normalizer_oracle(model, region))
for m in (64, 256, 1024):
    est = math.exp(estimate_normalizer(model, region, halton(m, 2)).log_estimate)
    kh = kh_error_bound(hk_variation_bound(32, 2, model.meta, region.radius), halton_bound_explicit(m, 2))
    print(f"m={m:5d}  observed {abs(est - oracle):.2e}  KH bound {kh.value:.2e}")

# %% [markdown]
# Rates: the QMC rate overtakes the MC one once m is large enough.
# `crossover` reports the ratio directly.

# %%
for m in (1e2, 1e4, 1e6):
    q = qmc_error_rate(100, m, 2).value
    mc = math.exp(mc_error_rate(100, m, 2, model.meta).components["main"])
    c = crossover(100, m, 2, "classical")
    print(f"m={m:8.0f}  qmc {q:.3e}  mc {mc:.3e}  classical ratio {c['ratio']:.3f}  qmc wins {c['qmc_wins']}")
