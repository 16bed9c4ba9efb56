"""
Normal and autoregressive limits of the Hamming weight
======================================================

Centred and scaled by ``sqrt(n)``, the Hamming weight after one step is
approximately normal.  When ``phi`` and ``gamma`` approach each other at rate
``1/sqrt(n)`` the scaled weight becomes an AR(1) process, whose transition
density has a Hermite-series form.

Run with ``python3 demos/normal_limits.py [OUTDIR]``.
"""

import sys
from pathlib import Path

import numpy as np

from hyperwalk import IidTheta, SimConfig, simulate_path, validate_params
from hyperwalk.asymptotics import (AsymptoticParams, ar1_normal_density, ar1_stationary, hermite_tail_bound,
                                   hermite_transition_density, phi_moments_beta)
from hyperwalk.io import write_table
from hyperwalk.verify import clt_check

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(parents=True, exist_ok=True)

# %%
# One step from a weight half a standard deviation above ``n gamma``.
r = clt_check(validate_params(0.7, 0.6, 10_000), theta=0.3, u=0.5, replicates=5000, seed=1)
print(f"one step: mean {r.mean:.4f} (limit {r.mu:.4f}), variance {r.variance:.4f} (limit {r.sigma2:.4f}), "
      f"KS {r.ks_raw:.4f}")

# %%
# The AR(1) regime: ``sqrt(n)(phi - gamma) = c``.
ap = AsymptoticParams(alpha=0.6, c=1.0, n=10_000)
path = simulate_path(SimConfig(ap.model_params(), IidTheta(0.5), steps=2200, seed=9))
v = ap.scaled(path.hamming)[201:]
mean, var = ar1_stationary(0.5, 1.0, 0.6)
print(f"AR(1): simulated mean {v.mean():.4f}, limit {mean:.4f}; variance {v.var():.4f}, limit {var:.4f}")
lag1 = np.corrcoef(v[:-1], v[1:])[0, 1]
print(f"lag-one autocorrelation {lag1:.3f}, limit {1 - 0.5 / 0.6:.3f}")

# %%
# With a fixed latent frequency the Hermite series sums to a normal density.
# With a Beta latent law it is a mixture of normals; the tail bound applies
# when ``|1 - theta/phi|`` stays below one.
phi, c, v_prev = 0.6, 1.0, 0.0
grid = np.linspace(-2.0, 2.0, 201)
shrink = 1 - 0.5 / phi
fixed = hermite_transition_density(grid, v_prev, c, phi, shrink ** np.arange(41))
normal = ar1_normal_density(grid, v_prev, c, phi, shrink)
print("fixed latent frequency, largest difference from the normal density:", np.abs(fixed - normal).max())
print("tail bound at 40 terms:", hermite_tail_bound(grid, v_prev, c, phi, abs(shrink)).max())
mixture = hermite_transition_density(grid, v_prev, c, phi, phi_moments_beta(8.0, 2.0, phi, 40))
write_table(out / "transition_density.csv", {"v": grid, "fixed_theta": fixed, "beta_8_2": mixture})
print("densities written to", out / "transition_density.csv")
