"""
Chains with a fixed number of latent ones
=========================================

With exactly ``M`` latent ones per step and ``phi < gamma`` the stationary
walk has few ones; as ``n`` grows their expected number tends to
``M / (1 - phi/gamma)``.  The exact
stationary law of the Hamming weight comes from the lumped kernel; it is
markedly narrower than a Poisson law with the same mean, because arrivals
are not independent.

Run with ``python3 demos/extreme_point_chain.py``.
"""

import numpy as np
from scipy import linalg, stats

from hyperwalk import ExtremePoint, hamming_kernel, spectrum_from_latent, validate_params
from hyperwalk.asymptotics import extreme_point_limits

n, M = 150, 3
params = validate_params(0.8, 0.9, n)
limits = extreme_point_limits(M, n, params)
print(f"coordinate probability {limits.p:.5f}; Poisson rate {limits.poisson_rate:.2f}")

# %%
# Stationary law of the Hamming weight: the left eigenvector for eigenvalue 1.
kernel = np.asarray(hamming_kernel(spectrum_from_latent(ExtremePoint(M), params)), dtype=float)
values, vectors = linalg.eig(kernel.T)
pi = np.real(vectors[:, np.argmin(np.abs(values - 1))])
pi = pi / pi.sum()
k = np.arange(n + 1)
mean = pi @ k
var = pi @ k**2 - mean**2
print(f"exact stationary weight: mean {mean:.3f}, variance {var:.3f}")

# %%
# At this size the mean is still well below the limiting rate, so compare
# against a Poisson law with the same mean: the gap is the missing variance.
poisson = stats.poisson(mean).pmf(k)
print(f"total variation to Poisson({mean:.1f}): {0.5 * np.abs(pi - poisson).sum():.3f}")
