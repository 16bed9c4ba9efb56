"""Long-range random walks on the hypercube driven by latent binary vectors.

The walk moves every coordinate of ``x in {0,1}^n`` at once: a latent vector
``Z`` decides which coordinates are redrawn, and the kernel has an explicit
expansion in products of Krawtchouk polynomials.  The package builds exact
kernels, simulates paths, evaluates moments and limit laws, and estimates the
parameters back from an observed path.
"""

__version__ = "0.1.0"

from .core import HyperState, ModelParams, SamplePath, TransitionCounts, transition_counts, validate_params
from .latent import DeFinetti, ExplicitPmf, ExtremePoint, IidTheta, LatentModel
from .kernel import (KernelSpectrum, full_kernel, hamming_kernel, kernel_entry_exchangeable,
                     spectrum_from_latent, z_law_from_kernel)
from .oracle import oracle_kernel, oracle_lump_hamming, oracle_stationary
from .simulator import SimConfig, sample_limit, simulate_path, simulate_replicates, step
from .estimator import estimate_phi_gamma, estimate_theta, estimate_thetas, path_stats

__all__ = [
    "DeFinetti", "ExplicitPmf", "ExtremePoint", "HyperState", "IidTheta", "KernelSpectrum", "LatentModel",
    "ModelParams", "SamplePath", "SimConfig", "TransitionCounts", "estimate_phi_gamma", "estimate_theta",
    "estimate_thetas", "full_kernel", "hamming_kernel", "kernel_entry_exchangeable", "oracle_kernel",
    "oracle_lump_hamming", "oracle_stationary", "path_stats", "sample_limit", "simulate_path",
    "simulate_replicates", "spectrum_from_latent", "step", "transition_counts", "validate_params",
    "z_law_from_kernel",
]
