# %% [markdown]
# Truncated normalizing constants: MC against Halton
#
# A Gaussian conjugate posterior has a closed-form normalizer, so the error of
# the cube-truncated estimates can be measured exactly.

# %%
import math

import numpy as np

from qmclik import (CurvatureMeta, estimate_normalizer, gaussian_conjugate, halton, make_region,
                    run_mc_replicates, truncated_normalizer_oracle)

rng = np.random.default_rng(1)
model = gaussian_conjugate(rng.standard_normal((8, 1)))
model.mode, model.oracle_log_normalizer

# %%
# half-width sqrt(p log(n) / n): unit curvature with t = log n
region = make_region(model, "high_dim", t=math.log(8), meta=CurvatureMeta(1.0, 1.0))
print("radius", region.radius)

# %% [markdown]
# The Halton estimate converges to the truncated integral, not the full one.
# The gap that remains is the mass outside the cube.

# %%
lost = math.expm1(truncated_normalizer_oracle(model, region) - model.oracle_log_normalizer)
for m in (400, 800, 1600, 3200):
    rep = estimate_normalizer(model, region, halton(m, 1, start_index=1))
    print(f"m={m:5d}  qmc rel err {rep.rel_error:+.6f}   truncation alone {lost:+.6f}")

# %%
# the uniform grid spreads around the same target
for m in (400, 3200):
    st = run_mc_replicates(model, region, m, 500, seed=7)
    print(f"m={m:5d}  mc mean {st.mean_rel_error:+.6f}  95% [{st.q025:+.6f}, {st.q975:+.6f}]")
