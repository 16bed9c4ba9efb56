"""Spectral transition kernels of the walk.

The one-step kernel is

    p(x, y) = pi_phi(y) {1 + sum_{A nonempty} kappa_A prod_{k in A} (1 - y_k/phi)(1 - x_k/gamma)}

where ``pi_phi`` is the product Bernoulli(phi) law and the eigenvalues are
moments of the latent vector,

    kappa_A = (alpha / (1 - alpha))^|A| E[prod_{k in A} (1 - Z_k / alpha)].

For exchangeable latent laws ``kappa_A`` depends only on ``|A|`` and the
kernel can be written with Krawtchouk polynomials, which also gives the
kernel of the Hamming weight ``||X_t||``.

Precision
---------
The expansions alternate in sign and cancel strongly (terms grow like
``max(alpha/(1-alpha), (1-alpha)/alpha)^n``).  Dense kernels up to
``MP_DENSE_MAX_N`` coordinates and all exchangeable and Hamming kernels are
therefore summed in extended binary precision (gmpy2) and rounded to doubles
once.  When a spectrum was built from a latent law the law is kept alongside
it, so the eigenvalues can be recomputed at that precision instead of being
read back from rounded doubles.  Fraction parameters give exact results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, comb, log2

import gmpy2
import numpy as np

from .core import ModelParams, kappa_range, popcounts, to_fraction, validate_params
from .exceptions import (
    InvalidCounts,
    KappaOutOfRange,
    LengthMismatch,
    NonStochastic,
    NotRealizable,
    ParamDegenerate,
    TooLarge,
)
from .latent import LatentModel
from .orthopoly import krawtchouk_mp, krawtchouk_table

DENSE_MAX_N = 12
SUBSET_MAX_N = 20
EXCHANGEABLE_MAX_N = 1000
MP_DENSE_MAX_N = 8
CLAMP_TOL = 1e-10
REALIZABLE_TOL = 1e-10


# ---------------------------------------------------------------------------
# numerical helpers


def _working_bits(n, *probs) -> int:
    spread = 1.0
    for p in probs:
        p = float(p)
        if 0 < p < 1:
            spread = max(spread, p / (1 - p), (1 - p) / p)
    return 128 + ceil(n * (3 + log2(spread)))


def _mp_context(n, *probs):
    return gmpy2.context(gmpy2.get_context(), precision=_working_bits(n, *probs))


def _to_mp(values) -> np.ndarray:
    arr = np.asarray(values)
    out = np.empty(arr.shape, dtype=object)
    flat = out.reshape(-1)
    for i, v in enumerate(arr.reshape(-1)):
        flat[i] = gmpy2.mpfr(v) if not isinstance(v, Fraction) else gmpy2.mpfr(gmpy2.mpq(v.numerator, v.denominator))
    return out


def _to_mpq(values) -> np.ndarray:
    arr = np.asarray(values)
    out = np.empty(arr.shape, dtype=object)
    out.reshape(-1)[:] = [gmpy2.mpq(v.numerator, v.denominator) for v in map(to_fraction, arr.reshape(-1))]
    return out


def _mpq_to_fraction(arr) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    out.reshape(-1)[:] = [Fraction(int(v.numerator), int(v.denominator)) for v in arr.reshape(-1)]
    return out


def _coerce(values, exact: bool) -> np.ndarray:
    """Fractions (object array) in exact mode, doubles otherwise."""
    arr = np.asarray(values)
    if exact:
        out = np.empty(arr.shape, dtype=object)
        out.reshape(-1)[:] = [to_fraction(v) for v in arr.reshape(-1)]
        return out
    return arr.astype(float)


def _axis_transform(arr, mat, n: int) -> np.ndarray:
    """Apply the 2x2 matrix ``mat[out][in]`` along each of the ``n`` leading binary axes.

    ``arr`` has shape ``(2**n,) + rest`` with the leading index read as a bit
    string, coordinate 1 most significant.  The result equals multiplying by
    the ``n``-fold Kronecker power of ``mat`` without forming it.
    """
    rest = arr.shape[1:]
    t = arr.reshape((2,) * n + rest)
    for ax in range(n):
        a0 = np.take(t, 0, axis=ax)
        a1 = np.take(t, 1, axis=ax)
        t = np.stack([mat[0][0] * a0 + mat[0][1] * a1, mat[1][0] * a0 + mat[1][1] * a1], axis=ax)
    return t.reshape((2**n,) + rest)


def _kappa_matrix(alpha, one):
    """Per-coordinate map from a latent pmf to subset eigenvalues.

    Row ``a = 1`` (coordinate in ``A``) holds ``(alpha - z) / (1 - alpha)``.
    """
    beta = one - alpha
    return [[one, one], [alpha / beta, (alpha - one) / beta]]


def _latent_matrix(alpha, one):
    """Inverse of :func:`_kappa_matrix`: subset eigenvalues back to a pmf."""
    beta = one - alpha
    return [[beta, beta], [alpha, -beta]]


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True, eq=False)
class KernelSpectrum:
    """Eigenvalues of one transition kernel.

    Attributes
    ----------
    params : ModelParams
    mode : {"subset", "exchangeable"}
        ``"subset"`` stores ``kappa_A`` for every subset bitmask ``A`` (index
        order, coordinate 1 most significant, ``n <= 20``).  ``"exchangeable"``
        stores ``kappa_k`` for ``k = |A| = 0 .. n``.
    values : ndarray
    latent_law : ndarray or None
        The latent pmf (subset mode) or Hamming-weight law (exchangeable mode)
        the eigenvalues were computed from, when known.
    """

    params: ModelParams
    mode: str
    values: np.ndarray
    latent_law: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in ("subset", "exchangeable"):
            raise ValueError(f"unknown spectrum mode {self.mode!r}")
        vals = np.array(self.values, dtype=object if self.exact_values(self.values) else float).reshape(-1)
        n = self.params.n
        expected = 2**n if self.mode == "subset" else n + 1
        if vals.size != expected:
            raise LengthMismatch(f"{self.mode} spectrum for n={n} needs {expected} values, got {vals.size}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @staticmethod
    def exact_values(values) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in np.asarray(values, dtype=object).reshape(-1))

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def exact(self) -> bool:
        return self.params.exact and self.values.dtype == object

    def subset_values(self) -> np.ndarray:
        """``kappa_A`` for every subset bitmask."""
        if self.mode == "subset":
            return self.values
        if self.n > SUBSET_MAX_N:
            raise TooLarge(f"n={self.n} too large for a subset-indexed table")
        return self.values[popcounts(self.n)]

    def with_values(self, values) -> "KernelSpectrum":
        """Same parameters with replaced eigenvalues (the latent law is dropped)."""
        return KernelSpectrum(self.params, self.mode, values)

    @classmethod
    def from_values(cls, params: ModelParams, mode: str, values, check: bool = True) -> "KernelSpectrum":
        """Spectrum from user-supplied eigenvalues.

        Raises
        ------
        NotRealizable
            If ``check`` and the values are not the eigenvalues of any latent
            law (``kappa_empty != 1`` or the implied latent law has negative
            mass).
        """
        spectrum = cls(params, mode, values)
        if check:
            check_realizable(spectrum)
        return spectrum

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "phi": float(self.params.phi),
            "gamma": float(self.params.gamma),
            "n": self.n,
            "kappa": [float(v) for v in self.values],
        }

    @classmethod
    def from_dict(cls, data: dict, check: bool = True) -> "KernelSpectrum":
        params = validate_params(data["phi"], data["gamma"], data["n"])
        return cls.from_values(params, data["mode"], data["kappa"], check=check)


def subset_kappa(pmf, alpha) -> np.ndarray:
    """``kappa_A`` for all subsets from a latent pmf over the ``2**n`` states."""
    pmf = np.asarray(pmf)
    n = pmf.size.bit_length() - 1
    one = Fraction(1) if pmf.dtype == object else 1.0
    return _axis_transform(pmf, _kappa_matrix(alpha, one), n)


def exchangeable_kappa(hamming, n: int, alpha) -> np.ndarray:
    """``kappa_k = (alpha/(1-alpha))^k E[Q_k(||Z||; n, alpha)]`` for ``k = 0 .. n``."""
    hamming = np.asarray(hamming)
    if hamming.dtype == object:
        table = krawtchouk_table(n, alpha).values
        return np.array([(alpha / (1 - alpha)) ** k for k in range(n + 1)], dtype=object) * table.dot(hamming)
    with _mp_context(n, alpha):
        return _exchangeable_kappa_mp(_to_mp(hamming), n, alpha).astype(float)


def _exchangeable_kappa_mp(hamming_mp, n, alpha):
    a = gmpy2.mpfr(alpha)
    table = krawtchouk_mp(n, alpha)
    odds = a / (1 - a)
    scale = np.array([odds**k for k in range(n + 1)], dtype=object)
    return scale * table.dot(hamming_mp)


def spectrum_from_latent(model: LatentModel, params: ModelParams) -> KernelSpectrum:
    """Eigenvalues generated by a latent law.

    Explicit tables give a subset-indexed spectrum (exact expectation over the
    table); exchangeable families give the Krawtchouk form over the law of
    ``||Z||``.

    Raises
    ------
    DimensionMismatch
        If the model's dimension differs from ``params.n``.
    """
    n = params.n
    model.check_dimension(n)
    if not model.exchangeable:
        if n > SUBSET_MAX_N:
            raise TooLarge(f"n={n} too large for a subset-indexed spectrum")
        q = _coerce(model.subset_pmf(n), params.exact)
        return KernelSpectrum(params, "subset", subset_kappa(q, params.alpha), latent_law=q)
    if n > EXCHANGEABLE_MAX_N:
        raise TooLarge(f"n={n} exceeds {EXCHANGEABLE_MAX_N} for the exchangeable spectrum")
    h = _coerce(model.hamming_pmf(n), params.exact)
    return KernelSpectrum(params, "exchangeable", exchangeable_kappa(h, n, params.alpha), latent_law=h)


def implied_latent_law(spectrum: KernelSpectrum) -> np.ndarray:
    """Latent pmf (subset mode) or Hamming law (exchangeable mode) with these eigenvalues."""
    p = spectrum.params
    n = p.n
    if spectrum.mode == "subset":
        one = Fraction(1) if spectrum.exact else 1.0
        alpha = p.alpha if spectrum.exact else float(p.alpha)
        return _axis_transform(spectrum.values, _latent_matrix(alpha, one), n)
    if spectrum.exact:
        table = krawtchouk_table(n, p.alpha).values
        binom = np.array([comb(n, z) * p.alpha**z * (1 - p.alpha) ** (n - z) for z in range(n + 1)], dtype=object)
        weights = np.array([comb(n, k) for k in range(n + 1)], dtype=object) * spectrum.values
        return binom * weights.dot(table)
    with _mp_context(n, p.alpha):
        a = gmpy2.mpfr(p.alpha)
        table = krawtchouk_mp(n, p.alpha)
        binom = np.array([comb(n, z) * a**z * (1 - a) ** (n - z) for z in range(n + 1)], dtype=object)
        weights = np.array([comb(n, k) for k in range(n + 1)], dtype=object) * _to_mp(spectrum.values)
        return (binom * weights.dot(table)).astype(float)


def check_realizable(spectrum: KernelSpectrum, tol: float = REALIZABLE_TOL) -> np.ndarray:
    """Return the implied latent law, or raise :class:`NotRealizable`."""
    if abs(spectrum.values[0] - 1) > (0 if spectrum.exact else tol):
        raise NotRealizable(f"kappa for the empty set is {spectrum.values[0]}, not 1")
    law = implied_latent_law(spectrum)
    low = min(law)
    if low < (0 if spectrum.exact else -tol):
        raise NotRealizable(f"implied latent law has negative mass {float(low):.3g}")
    return law


# ---------------------------------------------------------------------------
# dense kernels


@dataclass(frozen=True, eq=False)
class DenseKernel:
    """Full ``2**n x 2**n`` transition matrix, rows indexed by the from-state."""

    matrix: np.ndarray
    params: ModelParams

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != 2**self.params.n:
            raise LengthMismatch(f"matrix shape {m.shape} does not match n={self.params.n}")
        m.setflags(write=False)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def exact(self) -> bool:
        return self.matrix.dtype == object

    def row(self, x) -> np.ndarray:
        return self.matrix[_index(x)]

    def entry(self, x, y):
        return self.matrix[_index(x), _index(y)]


def _index(state) -> int:
    return state if isinstance(state, (int, np.integer)) else state.index


def finalize_stochastic(matrix, tol: float = CLAMP_TOL) -> np.ndarray:
    """Clamp round-off negatives and renormalise rows.

    Raises
    ------
    NonStochastic
        If an entry is below ``-tol`` (exact matrices: below 0).
    """
    if matrix.dtype == object:
        low = min(matrix.reshape(-1))
        if low < 0:
            raise NonStochastic(f"kernel has a negative entry {low}")
        return matrix
    low = matrix.min()
    if low < -tol:
        raise NonStochastic(f"kernel entry {low:.3g} is below -{tol:g}: the spectrum is not realizable")
    out = np.where(matrix < 0, 0.0, matrix)
    return out / out.sum(axis=1, keepdims=True)


def full_kernel(spectrum: KernelSpectrum) -> DenseKernel:
    """Dense kernel from the spectral expansion.

    Raises
    ------
    TooLarge
        If ``n > DENSE_MAX_N``.
    NonStochastic
        If the eigenvalues produce a row entry below ``-1e-10``.
    """
    p = spectrum.params
    n = p.n
    if n > DENSE_MAX_N:
        raise TooLarge(f"n={n} too large for dense kernel (limit {DENSE_MAX_N})")
    if spectrum.exact:
        # gmpy2 rationals are exact like Fraction and many times faster
        phi, gamma = _to_mpq([p.phi, p.gamma])
        matrix = _dense_from_kappa(_to_mpq(spectrum.subset_values()), phi, gamma, n, gmpy2.mpq(1))
        matrix = _mpq_to_fraction(matrix)
    elif n <= MP_DENSE_MAX_N:
        with _mp_context(n, p.phi, p.gamma):
            kappa = _subset_kappa_mp(spectrum)
            matrix = _dense_from_kappa(kappa, gmpy2.mpfr(p.phi), gmpy2.mpfr(p.gamma), n, gmpy2.mpfr(1))
            matrix = matrix.astype(float)
    else:
        matrix = _dense_from_kappa(spectrum.subset_values().astype(float), float(p.phi), float(p.gamma), n, 1.0)
    return DenseKernel(finalize_stochastic(matrix), p)


def _subset_kappa_mp(spectrum):
    p = spectrum.params
    law = spectrum.latent_law
    if law is None:
        return _to_mp(spectrum.subset_values())
    if spectrum.mode == "subset":
        return _axis_transform(_to_mp(law), _kappa_matrix(gmpy2.mpfr(p.alpha), gmpy2.mpfr(1)), p.n)
    return _exchangeable_kappa_mp(_to_mp(law), p.n, p.alpha)[popcounts(p.n)]


def _dense_from_kappa(kappa, phi, gamma, n, one):
    # rows index the from-state x, columns the subset A
    g1 = [[one, one], [one, one - one / gamma]]
    # rows index the to-state y: phi_y times (1 - y/phi) when the coordinate is in A
    f1 = [[one - phi, one - phi], [phi, phi - one]]
    size = 2**n
    diag = np.empty((size, size), dtype=object if not isinstance(one, float) else float)
    diag[...] = 0 * one
    diag[np.arange(size), np.arange(size)] = kappa
    left = _axis_transform(diag, g1, n)
    return _axis_transform(np.ascontiguousarray(left.T), f1, n).T


# ---------------------------------------------------------------------------
# exchangeable entries and the Hamming kernel


def _counts_tuple(stats, n):
    if hasattr(stats, "as_tuple"):
        n00, n01, n10, n11 = stats.as_tuple()
    else:
        xw, yw, inner = (int(v) for v in stats)
        n00, n01, n10, n11 = n - xw - yw + inner, yw - inner, xw - inner, inner
    if min(n00, n01, n10, n11) < 0 or n00 + n01 + n10 + n11 != n:
        raise InvalidCounts(f"counts {(n00, n01, n10, n11)} are inconsistent with n={n}")
    return n00, n01, n10, n11


def _poly_power_product(factors, one):
    """Coefficients of ``prod (1 + c s)^m`` for ``(c, m)`` pairs."""
    coeffs = np.array([one], dtype=object)
    for c, m in factors:
        for _ in range(m):
            nxt = np.empty(coeffs.size + 1, dtype=object)
            nxt[:-1] = coeffs
            nxt[-1] = 0 * one
            nxt[1:] = nxt[1:] + c * coeffs
            coeffs = nxt
    return coeffs


def _entry_factors(phi, gamma, one):
    return (
        one,
        -(one - gamma) / gamma,
        -(one - phi) / phi,
        (one - phi) * (one - gamma) / (phi * gamma),
    )


def r_coefficients(stats, params: ModelParams) -> np.ndarray:
    """``R_k`` for ``k = 0 .. n``: coefficient of ``C(n,k) s^k`` in

    ``(1+s)^N00 (1 - s(1-gamma)/gamma)^N10 (1 - s(1-phi)/phi)^N01 (1 + s(1-phi)(1-gamma)/(phi gamma))^N11``.
    """
    n = params.n
    counts = _counts_tuple(stats, n)
    if params.phi == 0:
        raise ParamDegenerate("phi == 0: the exchangeable expansion divides by phi")
    binoms = np.array([comb(n, k) for k in range(n + 1)], dtype=object)
    if params.exact:
        c = _entry_factors(params.phi, params.gamma, Fraction(1))
        return _poly_power_product(zip(c, counts), Fraction(1)) / binoms
    with _mp_context(n, params.phi, params.gamma):
        c = _entry_factors(gmpy2.mpfr(params.phi), gmpy2.mpfr(params.gamma), gmpy2.mpfr(1))
        return (_poly_power_product(zip(c, counts), gmpy2.mpfr(1)) / binoms).astype(float)


def kernel_entry_exchangeable(stats, spectrum: KernelSpectrum):
    """``p(x, y)`` from ``(||x||, ||y||, <x, y>)`` (or TransitionCounts) for an exchangeable spectrum.

    Returns ``pi_phi(y) {1 + sum_k C(n, k) kappa_k R_k}``.

    Raises
    ------
    InvalidCounts
        If the statistics cannot come from two states of length ``n``.
    """
    if spectrum.mode != "exchangeable":
        raise ValueError("kernel_entry_exchangeable needs an exchangeable spectrum")
    p = spectrum.params
    n = p.n
    n00, n01, n10, n11 = _counts_tuple(stats, n)
    yw = n01 + n11
    if p.phi == 0:
        raise ParamDegenerate("phi == 0: the exchangeable expansion divides by phi")
    if spectrum.exact:
        c = _entry_factors(p.phi, p.gamma, Fraction(1))
        poly = _poly_power_product(zip(c, (n00, n10, n01, n11)), Fraction(1))
        return p.phi**yw * (1 - p.phi) ** (n - yw) * poly.dot(spectrum.values)
    with _mp_context(n, p.phi, p.gamma, p.alpha):
        phi = gmpy2.mpfr(p.phi)
        c = _entry_factors(phi, gmpy2.mpfr(p.gamma), gmpy2.mpfr(1))
        poly = _poly_power_product(zip(c, (n00, n10, n01, n11)), gmpy2.mpfr(1))
        value = phi**yw * (1 - phi) ** (n - yw) * poly.dot(_exchangeable_kappa_values_mp(spectrum))
        return float(value)


def _exchangeable_kappa_values_mp(spectrum):
    if spectrum.latent_law is not None:
        return _exchangeable_kappa_mp(_to_mp(spectrum.latent_law), spectrum.n, spectrum.params.alpha)
    return _to_mp(spectrum.values)


def hamming_kernel(spectrum: KernelSpectrum) -> np.ndarray:
    """Transition matrix of ``||X_t||`` on ``0 .. n`` for an exchangeable spectrum.

    Entry ``(a, b)`` is
    ``C(n,b) phi^b (1-phi)^(n-b) sum_k C(n,k) kappa_k Q_k(b; n, phi) Q_k(a; n, gamma)``.

    Raises
    ------
    NonStochastic
        If an entry is below ``-1e-10``.
    """
    if spectrum.mode != "exchangeable":
        raise ValueError("hamming_kernel needs an exchangeable spectrum")
    p = spectrum.params
    n = p.n
    if n > EXCHANGEABLE_MAX_N:
        raise TooLarge(f"n={n} exceeds {EXCHANGEABLE_MAX_N} for the Hamming kernel")
    binoms = np.array([comb(n, k) for k in range(n + 1)], dtype=object)
    if spectrum.exact:
        q_phi = krawtchouk_table(n, p.phi).values
        q_gamma = krawtchouk_table(n, p.gamma).values
        law = np.array([comb(n, b) * p.phi**b * (1 - p.phi) ** (n - b) for b in range(n + 1)], dtype=object)
        inner = q_gamma.T.dot((binoms * spectrum.values)[:, None] * q_phi)
        return finalize_stochastic(inner * law[None, :])
    with _mp_context(n, p.phi, p.gamma, p.alpha):
        phi = gmpy2.mpfr(p.phi)
        q_phi = krawtchouk_mp(n, p.phi)
        q_gamma = krawtchouk_mp(n, p.gamma)
        law = np.array([comb(n, b) * phi**b * (1 - phi) ** (n - b) for b in range(n + 1)], dtype=object)
        weights = binoms * _exchangeable_kappa_values_mp(spectrum)
        inner = q_gamma.T.dot(weights[:, None] * q_phi)
        matrix = (inner * law[None, :]).astype(float)
    return finalize_stochastic(matrix)


# ---------------------------------------------------------------------------
# single coordinates and latent recovery


@dataclass(frozen=True, eq=False)
class SingleCoordinateKernel:
    """2x2 kernel ``p_xy = phi_y {1 + kappa (1 - x/gamma)(1 - y/phi)}`` of one coordinate."""

    kappa: float
    params: ModelParams
    matrix: np.ndarray

    def stationary_param(self):
        """Probability of state 1 under the stationary law.

        Equals ``(phi - kappa (1-phi)) / (1 - kappa (1-phi)/gamma)``.
        """
        phi, gamma = self.params.phi, self.params.gamma
        return (phi - self.kappa * (1 - phi)) / (1 - self.kappa * (1 - phi) / gamma)


def single_coordinate_kernel(kappa, params: ModelParams) -> SingleCoordinateKernel:
    """2x2 coordinate kernel for eigenvalue ``kappa``.

    Raises
    ------
    KappaOutOfRange
        If ``kappa`` is outside :func:`hyperwalk.core.kappa_range`.
    """
    lo, hi = kappa_range(params.phi, params.gamma)
    if not lo <= kappa <= hi:
        raise KappaOutOfRange(f"kappa={kappa} outside [{lo}, {hi}]")
    phi, gamma = params.phi, params.gamma
    exact = params.exact and isinstance(kappa, (int, Fraction))
    matrix = np.empty((2, 2), dtype=object if exact else float)
    for x in (0, 1):
        for y in (0, 1):
            phi_y = phi if y else 1 - phi
            matrix[x, y] = phi_y + kappa * (1 - x / gamma) * (1 - phi) * (1 - 2 * y)
    return SingleCoordinateKernel(kappa, params, matrix)


def coordinate_kappa(mean_z, params: ModelParams):
    """Single-coordinate eigenvalue ``(alpha - E[Z_k]) / (1 - alpha)``."""
    alpha = params.alpha
    return (alpha - mean_z) / (1 - alpha)


def coordinate_chain_matrix(model: LatentModel, k: int, params: ModelParams) -> np.ndarray:
    """Transition matrix of coordinate ``k`` (0-based) alone."""
    mean_z = model.coordinate_means(params.n)[k]
    kappa = coordinate_kappa(mean_z, params)
    if not params.exact:
        kappa = float(kappa)
    return single_coordinate_kernel(kappa, params).matrix


def coordinate_stationary_param(mean_z, params: ModelParams):
    """Stationary probability of 1 for a coordinate whose latent mean is ``mean_z``."""
    kappa = coordinate_kappa(mean_z, params)
    phi, gamma = params.phi, params.gamma
    return (phi - kappa * (1 - phi)) / (1 - kappa * (1 - phi) / gamma)


def z_law_from_kernel(kernel: DenseKernel, params: ModelParams | None = None) -> np.ndarray:
    """Recover the latent pmf from a dense kernel.

    For ``phi <= gamma`` the latent pmf is the row of the zero state,
    ``P(Z = z) = p(0, z)``.  For ``phi > gamma`` it is the column of the zero
    state reweighted by the Bernoulli(gamma) to Bernoulli(phi) ratio at 0,
    ``P(Z = z) = (gamma/(1-phi))^||z|| ((1-gamma)/(1-phi))^(n-||z||) p(z, 0)``.

    Raises
    ------
    NotRealizable
        If the recovered table has negative mass or does not sum to 1 within 1e-10.
    """
    p = params or kernel.params
    n = p.n
    m = kernel.matrix
    if p.phi <= p.gamma:
        law = np.array(m[0, :])
    else:
        if p.phi == 1:
            raise ParamDegenerate("phi == 1: the zero column vanishes and the latent law is not identified")
        w = popcounts(n)
        up = p.gamma / (1 - p.phi)
        down = (1 - p.gamma) / (1 - p.phi)
        scale = np.array([up ** int(k) * down ** (n - int(k)) for k in w], dtype=m.dtype)
        law = scale * np.array(m[:, 0])
    tol = 0 if kernel.exact else REALIZABLE_TOL
    if min(law) < -tol or abs(sum(law) - 1) > tol:
        raise NotRealizable("recovered latent table is not a probability vector")
    return law


def product_bernoulli(n: int, p) -> np.ndarray:
    """Product Bernoulli(p) pmf over the ``2**n`` states, index order."""
    exact = isinstance(p, (int, Fraction))
    one = Fraction(1) if exact else 1.0
    w = popcounts(n)
    if exact:
        return np.array([p**int(k) * (one - p) ** (n - int(k)) for k in w], dtype=object)
    return float(p) ** w * (1 - float(p)) ** (n - w)


__all__ = [
    "DenseKernel",
    "KernelSpectrum",
    "SingleCoordinateKernel",
    "check_realizable",
    "coordinate_chain_matrix",
    "coordinate_kappa",
    "coordinate_stationary_param",
    "exchangeable_kappa",
    "finalize_stochastic",
    "full_kernel",
    "hamming_kernel",
    "implied_latent_law",
    "kernel_entry_exchangeable",
    "product_bernoulli",
    "r_coefficients",
    "single_coordinate_kernel",
    "spectrum_from_latent",
    "subset_kappa",
    "z_law_from_kernel",
]
