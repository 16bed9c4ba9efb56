"""Inference from an observed path.

``(phi, gamma)`` are estimated by least squares on per-step transition
proportions, using the identity ``p01 = phi + gamma (p01 - p11)`` that holds
for any latent frequency.  With ``(phi, gamma)`` fixed, each step's latent
frequency is estimated by maximising the Binomial likelihood of that step's
transition counts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .core import SamplePath, TransitionCounts
from .exceptions import (AllZeroCounts, BoundaryEstimate, DegenerateTransition, InvalidCounts,
                         NoVariation, TooFewEstimates)

THETA_LO = 1e-9
THETA_HI = 1 - 1e-9
BISECTION_STEPS = 64
MIN_ESTIMATES = 30


@dataclass(frozen=True, eq=False)
class PathStats:
    """Transition counts of a path, one row per step ``t = 1 .. T``.

    ``counts[:, :]`` holds ``(n00, n01, n10, n11)``.  Proportions are NaN
    where the starting class is empty; those steps are listed in
    ``degenerate``.
    """

    counts: np.ndarray
    degenerate: tuple = ()

    @property
    def steps(self) -> int:
        return self.counts.shape[0]

    @property
    def n(self) -> int:
        return int(self.counts[0].sum())

    @property
    def n0dot(self) -> np.ndarray:
        return self.counts[:, 0] + self.counts[:, 1]

    @property
    def n1dot(self) -> np.ndarray:
        return self.counts[:, 2] + self.counts[:, 3]

    def _ratio(self, num, den):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den > 0, num / np.where(den > 0, den, 1), np.nan)

    @property
    def p01(self) -> np.ndarray:
        return self._ratio(self.counts[:, 1], self.n0dot)

    @property
    def p11(self) -> np.ndarray:
        return self._ratio(self.counts[:, 3], self.n1dot)

    @property
    def d(self) -> np.ndarray:
        return self.p01 - self.p11

    def transition(self, t: int) -> TransitionCounts:
        """Counts of the step into ``x_t`` (``t`` starts at 1)."""
        return TransitionCounts(*(int(v) for v in self.counts[t - 1]))


def path_stats(path: SamplePath, strict: bool = False) -> PathStats:
    """Per-step transition counts.

    Raises
    ------
    ValueError
        If the path has no transitions.
    DegenerateTransition
        If ``strict`` and some step starts with all coordinates equal.
    """
    states = np.asarray(path.states if isinstance(path, SamplePath) else path, dtype=bool)
    if states.shape[0] < 2:
        raise ValueError("need at least one transition")
    x, y = states[:-1], states[1:]
    counts = np.stack([(~x & ~y).sum(1), (~x & y).sum(1), (x & ~y).sum(1), (x & y).sum(1)], axis=1)
    n0 = counts[:, 0] + counts[:, 1]
    bad = tuple(int(t) + 1 for t in np.flatnonzero((n0 == 0) | (n0 == states.shape[1])))
    if strict and bad:
        raise DegenerateTransition(f"{len(bad)} steps start from a constant state", transitions=bad)
    return PathStats(counts.astype(np.int64), bad)


# ---------------------------------------------------------------------------
# least squares for (phi, gamma)


@dataclass(frozen=True)
class PhiGammaEstimate:
    """Least-squares estimate; unpacks as ``(phi_hat, gamma_hat)``."""

    phi_hat: float
    gamma_hat: float
    used: int
    excluded: int
    no_variation: bool = False
    issues: tuple = ()

    def __iter__(self):
        return iter((self.phi_hat, self.gamma_hat))


def estimate_phi_gamma(stats: PathStats, strict: bool = False) -> PhiGammaEstimate:
    """Regress ``p01`` on ``d = p01 - p11``: the slope estimates ``gamma``, the intercept ``phi``.

    ``gamma = sum (d - dbar)(p01 - p01bar) / sum (d - dbar)^2`` and
    ``phi = p01bar - gamma dbar``.  Steps with an undefined proportion are
    excluded.  If ``d`` does not vary, the pooled estimate under
    ``phi == gamma`` is ``p01bar / (1 + dbar)``.

    Estimates outside ``[0, 1]`` are clamped and reported in ``issues``, as is
    ``phi + gamma < 1``.

    Raises
    ------
    NoVariation
        If ``strict`` and ``d`` is constant.
    ValueError
        If fewer than two steps remain.
    """
    p01, d = stats.p01, stats.d
    keep = np.isfinite(d)
    used = int(keep.sum())
    if used < 2:
        raise ValueError(f"need at least two usable steps, got {used}")
    p01, d = p01[keep], d[keep]
    dbar, pbar = d.mean(), p01.mean()
    sdd = np.sum((d - dbar) ** 2)
    issues = []
    if sdd <= 1e-15 * max(1.0, np.sum(d**2)):
        if strict:
            raise NoVariation("p01 - p11 is constant along the path")
        phi = gamma = pbar / (1 + dbar)
        no_variation = True
    else:
        gamma = float(np.sum((d - dbar) * (p01 - pbar)) / sdd)
        phi = float(pbar - gamma * dbar)
        no_variation = False
    clamped = []
    for name, value in (("phi", phi), ("gamma", gamma)):
        if not 0 <= value <= 1:
            issues.append(f"{name}_hat={value:.6g} clamped to [0, 1]")
        clamped.append(min(max(value, 0.0), 1.0))
    phi, gamma = clamped
    if phi + gamma < 1:
        issues.append(f"phi_hat + gamma_hat = {phi + gamma:.6g} < 1")
    return PhiGammaEstimate(float(phi), float(gamma), used, stats.steps - used, no_variation, tuple(issues))


# ---------------------------------------------------------------------------
# per-step maximum likelihood for theta


@dataclass(frozen=True)
class ThetaEstimate:
    t: int
    theta_hat: float
    converged: bool
    loglik: float


def _stay_probabilities(theta, phi: float, gamma: float):
    """``(p0, p1, c0, c1)``: ``P(0 -> 0)``, ``P(1 -> 0)`` and ``|dp/dtheta|``."""
    if phi <= gamma:
        p0 = 1 - theta
        p1 = 1 - phi / gamma + theta * (1 - gamma) / gamma
        return p0, p1, 1.0, (1 - gamma) / gamma
    p0 = (1 - phi) / (1 - gamma) * (1 - theta)
    p1 = (1 - phi) / gamma * theta
    return p0, p1, (1 - phi) / (1 - gamma), (1 - phi) / gamma


def _xlogy(a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a == 0, 0.0, a * np.log(b))


def theta_loglik(theta, counts, phi: float, gamma: float):
    """``n00 log p0 + n01 log(1 - p0) + n10 log p1 + n11 log(1 - p1)``."""
    n00, n01, n10, n11 = (np.asarray(c, dtype=float) for c in counts)
    p0, p1, _, _ = _stay_probabilities(theta, phi, gamma)
    return _xlogy(n00, p0) + _xlogy(n01, 1 - p0) + _xlogy(n10, p1) + _xlogy(n11, 1 - p1)


def theta_score(theta, counts, phi: float, gamma: float):
    """Derivative of :func:`theta_loglik`; decreasing in ``theta``.

    ``c0 (n01/(1-p0) - n00/p0) + c1 (n10/p1 - n11/(1-p1))``.
    """
    n00, n01, n10, n11 = (np.asarray(c, dtype=float) for c in counts)
    p0, p1, c0, c1 = _stay_probabilities(theta, phi, gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        zero = np.where(n01 == 0, 0.0, n01 / (1 - p0)) - np.where(n00 == 0, 0.0, n00 / p0)
        one = np.where(n10 == 0, 0.0, n10 / p1) - np.where(n11 == 0, 0.0, n11 / (1 - p1))
    return c0 * zero + c1 * one


def _as_count_rows(counts) -> np.ndarray:
    if isinstance(counts, TransitionCounts):
        rows = np.array([counts.as_tuple()], dtype=float)
    else:
        rows = np.atleast_2d(np.asarray(counts, dtype=float))
    if rows.shape[-1] != 4:
        raise InvalidCounts("counts need four entries (n00, n01, n10, n11)")
    if np.any(rows < 0):
        raise InvalidCounts("counts must be nonnegative")
    return rows


def _bisect_thetas(rows: np.ndarray, phi: float, gamma: float):
    cols = rows.T
    lo = np.full(rows.shape[0], THETA_LO)
    hi = np.full(rows.shape[0], THETA_HI)
    s_lo = theta_score(lo, cols, phi, gamma)
    s_hi = theta_score(hi, cols, phi, gamma)
    at_lo = s_lo <= 0
    at_hi = s_hi >= 0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        up = theta_score(mid, cols, phi, gamma) > 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    theta = 0.5 * (lo + hi)
    theta = np.where(at_lo, THETA_LO, np.where(at_hi, THETA_HI, theta))
    converged = ~(at_lo | at_hi)
    return theta, converged, theta_loglik(theta, cols, phi, gamma)


def estimate_theta(counts, phi: float, gamma: float, t: int = 1, strict: bool = False) -> ThetaEstimate:
    """Maximum-likelihood latent frequency for one step.

    The score is decreasing on ``(0, 1)``, so bisection on
    ``[1e-9, 1 - 1e-9]`` finds the unique interior root.  When the score has
    one sign on the whole bracket the clamped endpoint is returned with
    ``converged=False``.

    Raises
    ------
    AllZeroCounts
        If every count is zero.
    BoundaryEstimate
        If ``strict`` and the maximum is at an endpoint.
    """
    rows = _as_count_rows(counts)
    if rows.shape[0] != 1:
        raise InvalidCounts("estimate_theta takes the counts of a single step")
    if rows.sum() == 0:
        raise AllZeroCounts("no coordinates observed in this step")
    theta, converged, loglik = _bisect_thetas(rows, float(phi), float(gamma))
    if strict and not converged[0]:
        raise BoundaryEstimate(f"step {t}: likelihood is maximised at theta={theta[0]:.3g}")
    return ThetaEstimate(int(t), float(theta[0]), bool(converged[0]), float(loglik[0]))


def estimate_thetas(stats: PathStats, phi: float, gamma: float) -> list[ThetaEstimate]:
    """:func:`estimate_theta` for every step, vectorised over steps."""
    rows = stats.counts.astype(float)
    theta, converged, loglik = _bisect_thetas(rows, float(phi), float(gamma))
    return [ThetaEstimate(t + 1, float(th), bool(ok), float(ll))
            for t, (th, ok, ll) in enumerate(zip(theta, converged, loglik))]


# ---------------------------------------------------------------------------
# summaries


@dataclass(frozen=True, eq=False)
class ThetaSummary:
    """Histogram and moments of estimated latent frequencies."""

    count: int
    mean: float
    variance: float
    bin_edges: np.ndarray
    density: np.ndarray
    ks_distance: float | None = None
    reference: tuple | None = None
    reference_density: np.ndarray | None = field(default=None, repr=False)

    def histogram_rows(self):
        """``(left, right, density, reference_density)`` per bin."""
        ref = self.reference_density if self.reference_density is not None else [None] * len(self.density)
        return [(float(a), float(b), float(h), None if r is None else float(r))
                for a, b, h, r in zip(self.bin_edges[:-1], self.bin_edges[1:], self.density, ref)]


def theta_distribution_summary(estimates, reference=None, bins: int = 30,
                               include_unconverged: bool = False) -> ThetaSummary:
    """Histogram on ``[0, 1]``, mean and variance, and the KS distance to a Beta reference.

    Parameters
    ----------
    estimates
        ThetaEstimate objects or plain floats.
    reference
        Optional ``(a, b)`` of a Beta law.

    Raises
    ------
    TooFewEstimates
        If fewer than 30 usable estimates remain.
    """
    values = []
    for e in estimates:
        if isinstance(e, ThetaEstimate):
            if e.converged or include_unconverged:
                values.append(e.theta_hat)
        else:
            values.append(float(e))
    values = np.asarray(values, dtype=float)
    if values.size < MIN_ESTIMATES:
        raise TooFewEstimates(f"need at least {MIN_ESTIMATES} estimates, got {values.size}")
    density, edges = np.histogram(values, bins=bins, range=(0.0, 1.0), density=True)
    ks = ref_density = None
    if reference is not None:
        a, b = reference
        ks = float(sps.kstest(values, sps.beta(a, b).cdf).statistic)
        ref_density = np.diff(sps.beta.cdf(edges, a, b)) / np.diff(edges)
        reference = (float(a), float(b))
    if values.size and np.ptp(values) == 0:
        warnings.warn("all estimates are identical", RuntimeWarning, stacklevel=2)
    return ThetaSummary(int(values.size), float(values.mean()), float(values.var()), edges, density, ks,
                        reference, ref_density)
