"""Closed-form moments and limit laws.

Covers stationary means and covariances, the time evolution of coordinate
means, the stationary law under de Finetti latent laws, the Binomial structure
of transition counts, normal limits of the Hamming weight as ``n`` grows, the
limiting AR(1) process, its Hermite-series transition density, and the
Poisson limits of extreme-point chains.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy import special, stats

from .core import ModelParams, validate_params
from .exceptions import Boundary, ThetaBoundary, TruncationWarning
from .kernel import coordinate_stationary_param
from .latent import DeFinetti, LatentModel
from .orthopoly import hermite_table


# ---------------------------------------------------------------------------
# stationary moments


@dataclass(frozen=True, eq=False)
class StationaryMoments:
    """First and second moments of the stationary walk and of its latent driver."""

    m_x: np.ndarray
    c_x: np.ndarray
    m_z: np.ndarray
    c_z: np.ndarray
    a_z: np.ndarray


def stationary_mean(mean_z, params: ModelParams):
    """``(phi - alpha + (1-phi) m_Z) / (1 - alpha + ((1-phi)/gamma)(m_Z - alpha))``."""
    phi, gamma, alpha = params.phi, params.gamma, params.alpha
    return (phi - alpha + (1 - phi) * mean_z) / (1 - alpha + (1 - phi) / gamma * (mean_z - alpha))


def stationary_moments(model: LatentModel, params: ModelParams) -> StationaryMoments:
    """Stationary moments for a latent law reused i.i.d. at every step.

    Off the diagonal,

    ``C_X(k,l) = (1-phi)^2 C_Z(k,l) (m_k - gamma)(m_l - gamma) / ((1-alpha)^2 gamma^2 - (1-phi)^2 A_Z(k,l))``

    with ``A_Z(k,l) = C_Z(k,l) + (m_Z[k] - alpha)(m_Z[l] - alpha)``; the
    diagonal is ``m_k (1 - m_k)``.
    """
    n = params.n
    m_z = np.asarray(model.coordinate_means(n))
    c_z = np.asarray(model.covariance(n))
    exact = params.exact and m_z.dtype == object
    if not exact:
        m_z, c_z = m_z.astype(float), c_z.astype(float)
    phi, gamma, alpha = params.phi, params.gamma, params.alpha
    if not exact:
        phi, gamma, alpha = float(phi), float(gamma), float(alpha)
    m_x = stationary_mean(m_z, ModelParams(phi, gamma, n))
    offset = m_z - alpha
    a_z = c_z + np.outer(offset, offset)
    dev = m_x - gamma
    num = (1 - phi) ** 2 * c_z * np.outer(dev, dev)
    den = (1 - alpha) ** 2 * gamma**2 - (1 - phi) ** 2 * a_z
    if exact:
        c_x = np.array([[a / b if a != 0 else 0 * a for a, b in zip(ra, rb)] for ra, rb in zip(num, den)],
                       dtype=object)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            c_x = np.where(num == 0, 0.0, num / np.where(num == 0, 1.0, den))
    for k in range(n):
        c_x[k, k] = m_x[k] * (1 - m_x[k])
    return StationaryMoments(m_x, c_x, m_z, c_z, a_z)


# ---------------------------------------------------------------------------
# time evolution and de Finetti limits


def _contraction(theta, params: ModelParams):
    """``psi (1 - Theta/alpha)``: the mean factor applied to a coordinate per step."""
    return params.psi * (1 - np.asarray(theta, dtype=float) / params.alpha)


def marginal_mean_path(x0, theta, params: ModelParams, t: int) -> np.ndarray:
    """``P(X_t[k] = 1)`` when latent vectors are i.i.d. over time with ``E[Z[k]] = Theta[k]``.

    With ``r = psi (1 - Theta/alpha)``,
    ``P(X_t[k] = 1) = phi - (gamma - phi) r (1 - r^t)/(1 - r) - (phi - x0[k]) r^t``.
    """
    x0 = np.asarray(getattr(x0, "bits", x0), dtype=float)
    phi, gamma = float(params.phi), float(params.gamma)
    r = np.broadcast_to(_contraction(theta, params), x0.shape)
    rt = r**t
    with np.errstate(divide="ignore", invalid="ignore"):
        geometric = np.where(r == 1, float(t), r * (1 - rt) / (1 - r))
    return phi - (gamma - phi) * geometric - (phi - x0) * rt


def definetti_limit_prob(params: ModelParams, theta_tilde) -> float:
    """Stationary ``P(X[k] = 1)`` for a de Finetti latent law with mean frequency ``theta_tilde``.

    ``phi - (gamma - phi) r / (1 - r)`` with ``r = psi (1 - theta_tilde/alpha)``;
    equal to ``phi`` when ``phi == gamma``.

    Raises
    ------
    Boundary
        If ``phi + gamma == 1``.
    """
    if params.phi + params.gamma <= 1:
        raise Boundary("phi + gamma == 1: the stationary law is not unique")
    if params.phi == params.gamma:
        return float(params.phi)
    r = float(_contraction(theta_tilde, params))
    return float(params.phi) - (float(params.gamma) - float(params.phi)) * r / (1 - r)


# ---------------------------------------------------------------------------
# transition counts


@dataclass(frozen=True)
class CountDistribution:
    """Law of ``(N01, N11)`` given ``(N0., N1.)`` and latent frequency ``theta``.

    ``N01 ~ Bin(N0., q01)`` and ``N11 ~ Bin(N1., q11)`` independently.
    """

    q01: float
    q11: float
    n0dot: int
    n1dot: int
    theta: float
    params: ModelParams

    def mean(self):
        return self.n0dot * self.q01, self.n1dot * self.q11

    def covariances(self):
        """``(Cov(||Z||, N01), Cov(||Z||, N11))`` when ``||Z|| ~ Bin(n, theta)``."""
        p = self.params
        th, phi, gamma, alpha = self.theta, p.phi, p.gamma, p.alpha
        c01 = self.n0dot * th * (1 - th) * (1 - phi) / (1 - alpha)
        c11 = -self.n1dot * th * (1 - th) * (1 - phi) * (1 - gamma) / (gamma * (1 - alpha))
        return c01, c11

    def logpmf(self, n01, n11):
        return stats.binom.logpmf(n01, self.n0dot, self.q01) + stats.binom.logpmf(n11, self.n1dot, self.q11)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.binomial(self.n0dot, self.q01, size), rng.binomial(self.n1dot, self.q11, size)


def count_probabilities(theta, params: ModelParams):
    """``(q01, q11)`` from the unified formulas.

    ``q01 = 1 - (1-theta)(1-phi)/(1-alpha)``,
    ``q11 = (alpha (1-theta) + theta (phi + gamma - 1)) / gamma``.
    """
    phi, gamma, alpha = params.phi, params.gamma, params.alpha
    q01 = 1 - (1 - theta) * (1 - phi) / (1 - alpha)
    q11 = (alpha * (1 - theta) + theta * (phi + gamma - 1)) / gamma
    return q01, q11


def count_probabilities_by_branch(theta, params: ModelParams):
    """Branch-specific forms of ``(q01, q11)``; they agree with :func:`count_probabilities`."""
    phi, gamma = params.phi, params.gamma
    if phi <= gamma:
        return theta, (phi - theta * (1 - gamma)) / gamma
    return 1 - (1 - theta) * (1 - phi) / (1 - gamma), 1 - theta * (1 - phi) / gamma


def count_distribution(n0dot: int, n1dot: int, theta, params: ModelParams) -> CountDistribution:
    q01, q11 = count_probabilities(theta, params)
    return CountDistribution(q01, q11, int(n0dot), int(n1dot), theta, params)


def count_pgf(s01, s11, h, n0dot: int, n1dot: int, theta, params: ModelParams):
    """``E[s01^N01 s11^N11 h^||Z|| | N0., N1.]`` when ``||Z|| ~ Bin(n, theta)``.

    The factor for coordinates starting at 0 is ``(1-theta)(a + (1-a) s01)
    + theta h s01`` and for coordinates starting at 1 it is ``(1-theta)(b + (1-b) s11)
    + theta h ((1-phi)/gamma + s11 (1 - (1-phi)/gamma))``, where ``a`` and
    ``b`` are the no-latent probabilities of ending at 0.
    """
    phi, gamma = params.phi, params.gamma
    tb = 1 - theta
    keep = (1 - phi) / gamma
    if phi <= gamma:
        zero_part = tb + theta * h * s01
        one_part = tb * (1 - phi / gamma + s11 * phi / gamma) + theta * h * (keep + s11 * (1 - keep))
    else:
        ratio = (1 - phi) / (1 - gamma)
        zero_part = tb * (ratio + s01 * (1 - ratio)) + theta * h * s01
        one_part = tb * s11 + theta * h * (keep + s11 * (1 - keep))
    return zero_part**n0dot * one_part**n1dot


# ---------------------------------------------------------------------------
# normal limits


@dataclass(frozen=True)
class NormalLimit:
    """Conditional normal law of the scaled Hamming weight after one step."""

    c: float
    theta: float
    mu: float
    sigma2: float


def normal_limit_params(theta, u, params: ModelParams, c: float = 0.0) -> NormalLimit:
    """Limit of ``(||X_t|| - n phi)/sqrt(n)`` given ``(||X_{t-1}|| - n gamma)/sqrt(n) = u``.

    ``mu = psi (1 - theta/alpha) u`` and
    ``sigma2 = phi(1-phi) (1 - ((1-phi)/phi)((1-gamma)/gamma)(alpha/(1-alpha))^2 (1 - theta/alpha)^2)``.
    """
    phi, gamma, alpha = float(params.phi), float(params.gamma), float(params.alpha)
    shrink = 1 - theta / alpha
    mu = params.psi * shrink * u
    sigma2 = phi * (1 - phi) * (1 - (1 - phi) / phi * (1 - gamma) / gamma * (alpha / (1 - alpha)) ** 2 * shrink**2)
    return NormalLimit(c, theta, mu, sigma2)


def normal_limit_from_counts(theta, params: ModelParams):
    """``(q11 - q01, (1-gamma) q01 (1-q01) + gamma q11 (1-q11))``: the same limit from counts."""
    q01, q11 = count_probabilities(theta, params)
    gamma = params.gamma
    return q11 - q01, (1 - gamma) * q01 * (1 - q01) + gamma * q11 * (1 - q11)


def ar1_step(theta, v_prev, c: float, phi: float):
    """Conditional mean and variance of ``V_t`` given ``V_{t-1} = v_prev`` in the AR(1) limit."""
    shrink = 1 - theta / phi
    return shrink * (v_prev + c), phi * (1 - phi) * (1 - shrink**2)


def ar1_stationary(theta, c: float, phi: float):
    """Stationary mean ``phi c (1 - theta/phi)/theta`` and variance ``phi (1 - phi)``.

    Raises
    ------
    ThetaBoundary
        If ``theta`` is 0 or 1.
    """
    if not 0 < theta < 1:
        raise ThetaBoundary(f"theta={theta} must lie strictly inside (0, 1)")
    return phi * c * (1 - theta / phi) / theta, phi * (1 - phi)


def ar1_mean_path(v0_mean: float, theta, c: float, phi: float, t: int) -> float:
    """``E[V_t]`` for constant ``theta``: geometric approach to the stationary mean at rate ``1 - theta/phi``."""
    mean, _ = ar1_stationary(theta, c, phi)
    return mean + (1 - theta / phi) ** t * (v0_mean - mean)


@dataclass(frozen=True)
class AsymptoticParams:
    """Parameter sequence for the AR(1) regime with ``sqrt(n)(phi_n - gamma_n) = c``.

    ``scheme="symmetric"`` uses ``phi_n = alpha + c/(2 sqrt n)`` and
    ``gamma_n = alpha - c/(2 sqrt n)``.  ``scheme="fixed_alpha"`` keeps the
    smaller of the two equal to ``alpha``.
    """

    alpha: float
    c: float
    n: int
    scheme: str = "symmetric"

    @property
    def phi_gamma(self):
        shift = self.c / sqrt(self.n)
        if self.scheme == "symmetric":
            return self.alpha + shift / 2, self.alpha - shift / 2
        if self.scheme == "fixed_alpha":
            return (self.alpha + shift, self.alpha) if self.c >= 0 else (self.alpha, self.alpha - shift)
        raise ValueError(f"unknown scheme {self.scheme!r}")

    def model_params(self) -> ModelParams:
        phi, gamma = self.phi_gamma
        return validate_params(phi, gamma, self.n)

    def scaled(self, hamming) -> np.ndarray:
        """``(||X_t|| - n phi_n)/sqrt(n)``."""
        phi, _ = self.phi_gamma
        return (np.asarray(hamming, dtype=float) - self.n * phi) / sqrt(self.n)


# ---------------------------------------------------------------------------
# Hermite transition density


def phi_moments_beta(a: float, b: float, phi: float, jmax: int, nodes: int = 64) -> np.ndarray:
    """``E[(1 - Theta/phi)^j]`` for ``Theta ~ Beta(a, b)``, ``j = 0 .. jmax``.

    Gauss-Jacobi quadrature with ``nodes`` points is exact for ``j <= 2 nodes - 1``
    and avoids the cancellation of the binomial expansion.
    """
    if jmax > 2 * nodes - 1:
        nodes = jmax // 2 + 1
    x, w = special.roots_jacobi(nodes, b - 1, a - 1)
    theta = (1 + x) / 2
    w = w / w.sum()
    base = 1 - theta / phi
    return np.array([np.dot(w, base**j) for j in range(jmax + 1)])


def phi_moments_mc(model: DeFinetti, phi: float, jmax: int, rng: np.random.Generator,
                   draws: int = 1_000_000) -> np.ndarray:
    """Monte Carlo ``E[(1 - Theta/phi)^j]``; standard error about ``draws**-0.5``."""
    base = 1 - model.sample_theta(rng, draws) / phi
    return np.array([np.mean(base**j) for j in range(jmax + 1)])


def hermite_transition_density(v_t, v_prev, c: float, phi: float, phi_moments, j_max: int = 40):
    """Truncated Hermite series for the AR(1) transition density.

    With ``s = phi (1 - phi)``,

    ``f(v_t) = (2 pi s)^-1/2 exp(-v_t^2 / (2 s)) {1 + sum_{j=1}^{j_max} E[Phi^j]/j!
    He_j(v_t/sqrt s) He_j((v_prev + c)/sqrt s)}``

    where ``He_j`` are the probabilists' Hermite polynomials.

    Warns
    -----
    TruncationWarning
        If the truncated series is below ``-1e-8`` somewhere.
    """
    moments = np.asarray(phi_moments, dtype=float)
    if moments.size < j_max + 1:
        raise ValueError(f"need {j_max + 1} moments, got {moments.size}")
    if abs(moments[0] - 1) > 1e-12:
        raise ValueError("the zeroth moment must be 1")
    s = phi * (1 - phi)
    scale = sqrt(s)
    v_t = np.asarray(v_t, dtype=float)
    x = v_t / scale
    y = (np.asarray(v_prev, dtype=float) + c) / scale
    x, y = np.broadcast_arrays(x, y)
    hx = hermite_table(j_max, x)
    hy = hermite_table(j_max, y)
    coef = moments[: j_max + 1] / special.factorial(np.arange(j_max + 1))
    series = np.tensordot(coef, hx * hy, axes=1)
    density = np.exp(-0.5 * x**2) / sqrt(2 * np.pi * s) * series
    if np.min(density) < -1e-8:
        warnings.warn(f"truncated Hermite series is negative ({np.min(density):.3g})", TruncationWarning,
                      stacklevel=2)
    return density


CRAMER_CONSTANT = 1.086435


def hermite_tail_bound(v_t, v_prev, c: float, phi: float, rho: float, j_max: int = 40):
    """Upper bound on the terms dropped by :func:`hermite_transition_density`.

    Uses Cramer's inequality ``|He_j(x)| exp(-x^2/4) <= K sqrt(j!)`` with
    ``K = 1.086435`` together with ``|Phi| <= rho``; returns ``inf`` when
    ``rho >= 1``.
    """
    if rho >= 1:
        return np.full(np.broadcast(np.asarray(v_t), np.asarray(v_prev)).shape, np.inf)
    s = phi * (1 - phi)
    x = np.asarray(v_t, dtype=float) / sqrt(s)
    y = (np.asarray(v_prev, dtype=float) + c) / sqrt(s)
    envelope = CRAMER_CONSTANT**2 * np.exp((y**2 - x**2) / 4) / sqrt(2 * np.pi * s)
    return envelope * rho ** (j_max + 1) / (1 - rho)


def ar1_normal_density(v_t, v_prev, c: float, phi: float, shrink: float):
    """Density of ``N(shrink (v_prev + c), phi(1-phi)(1 - shrink^2))``."""
    s = phi * (1 - phi)
    return stats.norm.pdf(v_t, loc=shrink * (v_prev + c), scale=sqrt(s * (1 - shrink**2)))


# ---------------------------------------------------------------------------
# extreme-point chains


@dataclass(frozen=True)
class ExtremePointLimits:
    """Stationary quantities of an extreme-point chain with ``M`` latent ones.

    ``poisson_rate`` is the limiting Poisson mean of ``||X||`` (``phi < gamma``)
    or of ``n - ||X||`` (``phi > gamma``, flagged by ``complement``), and is
    None when ``phi == gamma``.
    """

    p: float
    poisson_rate: float | None
    complement: bool


def extreme_point_limits(M: int, n: int, params: ModelParams) -> ExtremePointLimits:
    if not 0 <= M <= n:
        raise ValueError("need 0 <= M <= n")
    p = float(coordinate_stationary_param(M / n, params))
    phi, gamma = float(params.phi), float(params.gamma)
    if phi < gamma:
        return ExtremePointLimits(p, M / (1 - phi / gamma), False)
    if phi > gamma:
        return ExtremePointLimits(p, (1 - phi) / gamma * M / (1 - (1 - phi) / (1 - gamma)), True)
    return ExtremePointLimits(p, None, False)


def omega_limit_prob(omega: float, params: ModelParams) -> float:
    """Stationary coordinate probability when ``M/n -> omega``."""
    return float(coordinate_stationary_param(omega, params))
