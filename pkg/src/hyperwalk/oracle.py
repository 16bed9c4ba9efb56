"""Brute-force ground truth for small dimensions.

Nothing here uses eigenvalues or orthogonal polynomials.  Kernels are built by
conditioning on the latent vector and multiplying the per-coordinate
transition factors; stationary laws come from power iteration; lumping is
checked by summing columns class by class.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import ModelParams, all_states, popcounts, to_fraction
from .exceptions import NotLumpable, Reducible, TooLarge
from .kernel import DenseKernel
from .latent import LatentModel

ORACLE_MAX_N = 12
LUMP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    """A pmf over the ``2**n`` states in index order."""

    pmf: np.ndarray

    @property
    def n(self) -> int:
        return self.pmf.size.bit_length() - 1

    def coordinate_means(self) -> np.ndarray:
        return all_states(self.n).T.astype(self.pmf.dtype) @ self.pmf

    def covariance(self) -> np.ndarray:
        s = all_states(self.n).astype(self.pmf.dtype)
        mean = s.T @ self.pmf
        return (s * self.pmf[:, None]).T @ s - np.outer(mean, mean)

    def hamming_pmf(self) -> np.ndarray:
        w = popcounts(self.n)
        out = np.zeros(self.n + 1, dtype=self.pmf.dtype)
        for k in range(self.n + 1):
            out[k] = self.pmf[w == k].sum()
        return out


def coordinate_factors(params: ModelParams, exact: bool | None = None) -> np.ndarray:
    """``P[z, x, y]``: probability a coordinate moves ``x -> y`` given latent value ``z``.

    ``phi_y {1 + (alpha/(1-alpha)) (1 - z/alpha) (1 - y/phi) (1 - x/gamma)}``,
    written without dividing by ``alpha`` or ``phi``.
    """
    exact = params.exact if exact is None else exact
    phi, gamma = (params.phi, params.gamma) if exact else (float(params.phi), float(params.gamma))
    alpha = min(phi, gamma)
    out = np.empty((2, 2, 2), dtype=object if exact else float)
    for z in (0, 1):
        for x in (0, 1):
            for y in (0, 1):
                phi_y = phi if y else 1 - phi
                out[z, x, y] = phi_y + (alpha - z) / (1 - alpha) * (1 - phi) * (1 - 2 * y) * (1 - x / gamma)
    return out


def _latent_table(model: LatentModel, n: int, exact: bool) -> np.ndarray:
    if model.exchangeable:
        h = model.hamming_pmf(n)
        per = [(to_fraction(h[m]) if exact else float(h[m])) / comb(n, m) for m in range(n + 1)]
        table = np.array(per, dtype=object if exact else float)[popcounts(n)]
    else:
        table = model.subset_pmf(n)
        table = np.array([to_fraction(v) for v in table], dtype=object) if exact else table.astype(float)
    return table


def oracle_kernel(model: LatentModel, params: ModelParams) -> DenseKernel:
    """Dense kernel ``sum_z P(Z=z) prod_k P[z_k, x_k, y_k]``.

    The latent sum is contracted one coordinate at a time, so the cost is
    ``O(4**n)`` rather than ``O(8**n)``.

    Raises
    ------
    TooLarge
        If ``n > 12``.
    """
    n = params.n
    if n > ORACLE_MAX_N:
        raise TooLarge(f"n={n} too large for the brute-force oracle (limit {ORACLE_MAX_N})")
    model.check_dimension(n)
    exact = params.exact
    factors = coordinate_factors(params, exact)
    # t has shape (2,)*(remaining latent coords) + (4**done,): pairs (x_k, y_k) accumulate at the end
    t = _latent_table(model, n, exact).reshape((2,) * n + (1,))
    for _ in range(n):
        # contract the first latent axis against P[z, x, y]
        t = np.stack([t[0][..., None] * factors[0, x, y] + t[1][..., None] * factors[1, x, y]
                      for x in (0, 1) for y in (0, 1)], axis=-1)
        t = t.reshape(t.shape[:-2] + (-1,))
    # last axis enumerates (x1, y1, x2, y2, ...) with x1 most significant
    t = t.reshape((2, 2) * n)
    order = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    matrix = np.ascontiguousarray(t.transpose(order).reshape(2**n, 2**n))
    return DenseKernel(matrix, params)


def _check_ergodic(matrix):
    size = matrix.shape[0]
    support = csr_matrix(np.asarray(matrix != 0, dtype=np.int8))
    count, _ = connected_components(support, directed=True, connection="strong")
    if count != 1:
        raise Reducible(f"kernel has {count} communicating classes")
    # period: gcd of level differences along edges of a breadth-first tree
    level = np.full(size, -1)
    level[0] = 0
    queue = deque([0])
    rows, cols = support.nonzero()
    adjacency = [[] for _ in range(size)]
    for r, c in zip(rows, cols):
        adjacency[r].append(c)
    period = 0
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                period = np.gcd(period, level[u] + 1 - level[v])
    if period != 1:
        raise Reducible(f"kernel is periodic with period {period}")


def oracle_stationary(kernel: DenseKernel, tol: float = 1e-14, max_iter: int = 1_000_000) -> ExactDistribution:
    """Unique stationary law by power iteration from the uniform vector.

    Raises
    ------
    Reducible
        If the kernel is reducible or periodic.
    """
    matrix = np.asarray(kernel.matrix, dtype=float)
    _check_ergodic(matrix)
    size = matrix.shape[0]
    pi = np.full(size, 1.0 / size)
    for _ in range(max_iter):
        nxt = pi @ matrix
        nxt /= nxt.sum()
        if np.abs(nxt - pi).max() <= tol:
            pi = nxt
            break
        pi = nxt
    else:
        raise RuntimeError("power iteration did not converge")
    residual = np.abs(pi @ matrix - pi).max()
    if residual > 1e-12:
        raise RuntimeError(f"stationary residual {residual:.3g} too large")
    return ExactDistribution(pi)


@dataclass(frozen=True, eq=False)
class LumpedKernel:
    """Hamming-weight kernel with the maximal within-class row deviation."""

    matrix: np.ndarray
    certificate: float


def oracle_lump_hamming(kernel: DenseKernel, tol: float = LUMP_TOL) -> LumpedKernel:
    """Lump a dense kernel by Hamming weight.

    Raises
    ------
    NotLumpable
        If the class sums differ across states of one weight by more than ``tol``.
    """
    n = kernel.n
    if n > ORACLE_MAX_N:
        raise TooLarge(f"n={n} too large for exhaustive lumping")
    weights = popcounts(n)
    exact = kernel.exact
    sums = np.zeros((2**n, n + 1), dtype=object if exact else float)
    if exact:
        sums[:] = Fraction(0)
    for m in range(n + 1):
        sums[:, m] = kernel.matrix[:, weights == m].sum(axis=1)
    lumped = np.empty((n + 1, n + 1), dtype=sums.dtype)
    worst = 0.0
    for m in range(n + 1):
        block = sums[weights == m]
        lumped[m] = block[0]
        worst = max(worst, float(np.abs((block - block[0]).astype(float)).max()))
    if worst > tol:
        raise NotLumpable(f"Hamming partition is not lumpable (deviation {worst:.3g})", certificate=worst)
    return LumpedKernel(lumped, worst)
