"""
Two ways to build the same kernel
=================================

The transition matrix of the walk can be written down from its eigenvalue
expansion in Krawtchouk products, or enumerated by brute force from the
coordinate rules and the latent law.  This script builds both for a small
cube, compares them, collapses the walk to its Hamming weight, and reads the
latent law back out of the kernel.

Run with ``python3 demos/kernel_equivalence.py``.
"""

import numpy as np

from hyperwalk import (DeFinetti, ExplicitPmf, full_kernel, hamming_kernel, oracle_kernel, oracle_lump_hamming,
                       spectrum_from_latent, validate_params, z_law_from_kernel)

# %%
# A non-exchangeable latent law on four coordinates, drawn at random.
params = validate_params(0.7, 0.6, 4)
latent = ExplicitPmf(np.random.default_rng(0).dirichlet(np.ones(16)))

spectrum = spectrum_from_latent(latent, params)
spectral = full_kernel(spectrum).matrix
brute = oracle_kernel(latent, params).matrix
print("largest entry difference, spectral vs enumerated:", np.abs(spectral - brute).max())
print("rows sum to one:", np.allclose(spectral.sum(axis=1), 1.0))

# %%
# The latent law is identifiable from the kernel.
recovered = z_law_from_kernel(full_kernel(spectrum), params)
print("latent pmf recovered to:", np.abs(np.asarray(recovered, dtype=float) - latent.probs).max())

# %%
# For an exchangeable latent law the Hamming weight is itself a Markov chain.
# Its kernel has a closed form that never touches the 2**n states.
exch = DeFinetti.beta(2.0, 3.0)
lumped = np.asarray(hamming_kernel(spectrum_from_latent(exch, params)), dtype=float)
reference = oracle_lump_hamming(oracle_kernel(exch, params)).matrix
print("Hamming kernel difference:", np.abs(lumped - reference).max())
np.set_printoptions(precision=4, suppress=True)
print(lumped)

# %%
# The closed form scales to cubes far too large to enumerate.
big = validate_params(0.7, 0.6, 60)
weights = np.asarray(hamming_kernel(spectrum_from_latent(exch, big)), dtype=float)
print("n = 60 Hamming kernel:", weights.shape, "row sums within", np.abs(weights.sum(axis=1) - 1).max())
