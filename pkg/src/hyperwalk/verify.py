"""Equivalence batteries comparing closed forms against brute force.

Each check returns :class:`CheckResult` records with the measured deviation,
so the same code backs the test suite and the ``verify`` command.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import sqrt
from typing import Callable

import numpy as np
from scipy import stats

from .asymptotics import normal_limit_params, stationary_moments
from .core import ModelParams, validate_params
from .exceptions import NotLumpable, Reducible
from .kernel import (KernelSpectrum, coordinate_chain_matrix, coordinate_stationary_param, full_kernel,
                     hamming_kernel, product_bernoulli, spectrum_from_latent, z_law_from_kernel)
from .latent import DeFinetti, ExplicitPmf, ExtremePoint, IidTheta
from .oracle import oracle_kernel, oracle_lump_hamming, oracle_stationary
from .rng import stream
from .simulator import step_batch

PAIRS = ((0.5, 0.5), (0.7, 0.6), (0.6, 0.7), (0.9, 0.2), (0.8, 0.3), (0.55, 0.5))
EXACT_PAIRS = tuple((Fraction(str(a)), Fraction(str(b))) for a, b in PAIRS)
KERNEL_TOL = 1e-12
MOMENT_TOL = 1e-8


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    deviation: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _result(suite, name, deviation, tol, detail="") -> CheckResult:
    deviation = float(deviation)
    return CheckResult(suite, name, deviation, tol, bool(deviation <= tol), detail)


def battery_models(n: int, seed: int = 0, exact: bool = False) -> list:
    """``(label, model)`` pairs: point masses, i.i.d. grids, extreme points, mixtures, random pmfs."""
    rng = np.random.default_rng([seed, n])
    num = (lambda v: Fraction(v)) if exact else float
    alternating = "".join("01"[(k % 2)] for k in range(n))
    models = [
        ("point:zeros", ExplicitPmf.point_mass("0" * n, exact=exact)),
        ("point:ones", ExplicitPmf.point_mass("1" * n, exact=exact)),
        (f"point:{alternating}", ExplicitPmf.point_mass(alternating, exact=exact)),
        ("iid:0.1", IidTheta(num("0.1") if exact else 0.1)),
        ("iid:0.5", IidTheta(num("0.5") if exact else 0.5)),
        ("iid:0.9", IidTheta(num("0.9") if exact else 0.9)),
        ("extreme:1", ExtremePoint(1)),
        (f"extreme:{n}", ExtremePoint(n)),
        ("definetti:grid", DeFinetti.from_grid([num("0.2"), num("0.7")], [num("0.4"), num("0.6")])
         if exact else DeFinetti.from_grid([0.2, 0.7], [0.4, 0.6])),
    ]
    if not exact:
        models.append(("definetti:beta(2,3)", DeFinetti.beta(2, 3)))
    for r in range(2):
        if exact:
            raw = rng.integers(1, 20, 2**n)
            pmf = np.array([Fraction(int(v), int(raw.sum())) for v in raw], dtype=object)
        else:
            pmf = rng.dirichlet(np.ones(2**n))
        models.append((f"explicit:random{r}", ExplicitPmf(pmf)))
    return models


def _params_grid(ns, pairs):
    for n in ns:
        for phi, gamma in pairs:
            yield validate_params(phi, gamma, n)


def _tag(p: ModelParams, label: str) -> str:
    return f"n={p.n} phi={float(p.phi):g} gamma={float(p.gamma):g} {label}"


def _max_abs(a, b) -> float:
    diff = np.asarray(a, dtype=object) - np.asarray(b, dtype=object)
    return float(max(abs(v) for v in diff.reshape(-1))) if diff.size else 0.0


# ---------------------------------------------------------------------------
# batteries


def check_kernel_equivalence(ns=range(1, 7), pairs=PAIRS, exact: bool = False, seed: int = 0) -> list:
    """Spectral kernel against the latent-conditioning oracle, entrywise."""
    suite = "kernel-exact" if exact else "kernel"
    out = []
    for p in _params_grid(ns, EXACT_PAIRS if exact else pairs):
        for label, model in battery_models(p.n, seed, exact):
            spectrum = spectrum_from_latent(model, p)
            dev = _max_abs(full_kernel(spectrum).matrix, oracle_kernel(model, p).matrix)
            out.append(_result(suite, _tag(p, label), dev, 0.0 if exact else KERNEL_TOL))
    return out


def perturb_toward_ones(eps: float) -> Callable[[KernelSpectrum], KernelSpectrum]:
    """Mix the eigenvalues with those of the all-ones latent point mass.

    The result is still a valid kernel, but it no longer matches the reverse
    kernel built from the unperturbed latent law.
    """
    def perturb(spectrum: KernelSpectrum) -> KernelSpectrum:
        ones = spectrum_from_latent(ExplicitPmf.point_mass("1" * spectrum.n, exact=False), spectrum.params)
        values = (1 - eps) * spectrum.subset_values().astype(float) + eps * ones.subset_values().astype(float)
        return KernelSpectrum(spectrum.params, "subset", values)
    return perturb


def check_reversibility(ns=range(1, 7), pairs=PAIRS, seed: int = 0,
                        perturb: Callable[[KernelSpectrum], KernelSpectrum] | None = None) -> list:
    """Swapped-parameter reversibility and propagation of product Bernoulli laws.

    ``gamma^|x| (1-gamma)^(n-|x|) p(x, y) = phi^|y| (1-phi)^(n-|y|) p_swapped(y, x)`` and
    ``Bernoulli(gamma)^n K = Bernoulli(phi)^n``.  ``perturb`` alters only the
    forward kernel's eigenvalues.
    """
    out = []
    for p in _params_grid(ns, pairs):
        for label, model in battery_models(p.n, seed):
            spectrum = spectrum_from_latent(model, p)
            if perturb is not None:
                spectrum = perturb(spectrum)
            forward = full_kernel(spectrum).matrix
            reverse = full_kernel(spectrum_from_latent(model, p.swapped())).matrix
            pi_gamma = product_bernoulli(p.n, float(p.gamma))
            pi_phi = product_bernoulli(p.n, float(p.phi))
            dev = np.abs(pi_gamma[:, None] * forward - (pi_phi[:, None] * reverse).T).max()
            out.append(_result("reversibility", _tag(p, label), dev, KERNEL_TOL))
            dev = np.abs(pi_gamma @ forward - pi_phi).max()
            out.append(_result("propagation", _tag(p, label), dev, KERNEL_TOL))
    return out


def check_lumping(ns=range(1, 7), pairs=PAIRS, seed: int = 0) -> list:
    """Hamming kernel against the lumped oracle; non-exchangeable laws must fail to lump."""
    out = []
    for p in _params_grid(ns, pairs):
        for label, model in battery_models(p.n, seed):
            oracle = oracle_kernel(model, p)
            if model.exchangeable:
                lumped = oracle_lump_hamming(oracle)
                dev = np.abs(hamming_kernel(spectrum_from_latent(model, p)) - lumped.matrix).max()
                out.append(_result("lumping", _tag(p, label), dev, KERNEL_TOL))
            elif p.n >= 2 and label.startswith("explicit"):
                try:
                    cert = oracle_lump_hamming(oracle).certificate
                    out.append(CheckResult("lumping", _tag(p, label) + " (expect NotLumpable)", cert, 0.0,
                                           False, "non-exchangeable law lumped"))
                except NotLumpable as exc:
                    out.append(CheckResult("lumping", _tag(p, label) + " (expect NotLumpable)", 0.0, 0.0,
                                           True, f"certificate {exc.certificate:.3g}"))
    return out


def check_z_law(ns=range(1, 9), pairs=PAIRS, seed: int = 0) -> list:
    """Latent pmf recovered from the kernel it generates."""
    out = []
    for p in _params_grid(ns, pairs):
        for label, model in battery_models(p.n, seed):
            recovered = z_law_from_kernel(full_kernel(spectrum_from_latent(model, p)), p)
            truth = np.asarray(model.subset_pmf(p.n), dtype=float)
            out.append(_result("zlaw", _tag(p, label), np.abs(recovered - truth).max(), KERNEL_TOL))
    return out


def check_moments(ns=range(1, 7), pairs=PAIRS, seed: int = 0) -> list:
    """Closed-form stationary means and covariances against the oracle stationary law.

    Parameters equal to 0 or 1 and non-ergodic kernels are skipped.
    """
    out = []
    for p in _params_grid(ns, pairs):
        if p.boundary:
            continue
        for label, model in battery_models(p.n, seed):
            try:
                dist = oracle_stationary(oracle_kernel(model, p))
            except Reducible:
                continue
            sm = stationary_moments(model, p)
            out.append(_result("moments:mean", _tag(p, label),
                               np.abs(dist.coordinate_means() - sm.m_x).max(), MOMENT_TOL))
            out.append(_result("moments:cov", _tag(p, label),
                               np.abs(dist.covariance() - sm.c_x).max(), MOMENT_TOL))
            chain = coordinate_chain_matrix(model, 0, p).astype(float)
            p1 = float(coordinate_stationary_param(float(np.asarray(model.coordinate_means(p.n))[0]), p))
            dev = abs(np.array([1 - p1, p1]) @ chain - np.array([1 - p1, p1])).max()
            out.append(_result("moments:coordinate", _tag(p, label), dev, MOMENT_TOL))
    return out


# ---------------------------------------------------------------------------
# Monte Carlo normal limit


@dataclass(frozen=True)
class CltResult:
    mean: float
    variance: float
    mu: float
    sigma2: float
    mean_z: float
    var_z: float
    ks: float
    ks_raw: float
    replicates: int


def one_step_scaled(params: ModelParams, theta: float, u: float, replicates: int, seed: int,
                    chunk: int = 500) -> np.ndarray:
    """``(||X_1|| - n phi)/sqrt(n)`` over replicates started from ``||X_0|| = round(n gamma + u sqrt n)``."""
    n = params.n
    w0 = int(round(n * float(params.gamma) + u * sqrt(n)))
    rng = stream(seed, 0)
    model = IidTheta(theta)
    out = np.empty(replicates)
    x = np.zeros((chunk, n), dtype=np.uint8)
    x[:, :w0] = 1
    for start in range(0, replicates, chunk):
        size = min(chunk, replicates - start)
        y, _, _ = step_batch(x[:size], model, params, rng)
        out[start:start + size] = y.sum(axis=1)
    return (out - n * float(params.phi)) / sqrt(n), (w0 - n * float(params.gamma)) / sqrt(n)


def clt_check(params: ModelParams, theta: float, u: float, replicates: int, seed: int,
              jitter_seed: int | None = None) -> CltResult:
    """Compare one-step scaled Hamming weights with their normal limit.

    ``ks`` spreads each lattice value uniformly over its cell of width
    ``n**-0.5`` (a continuity correction); ``ks_raw`` is the distance of the
    lattice sample itself.
    """
    v, u_exact = one_step_scaled(params, theta, u, replicates, seed)
    lim = normal_limit_params(theta, u_exact, params)
    sd = sqrt(lim.sigma2)
    m, var = v.mean(), v.var(ddof=1)
    mean_z = (m - lim.mu) / (sd / sqrt(replicates))
    var_z = (var - lim.sigma2) / (lim.sigma2 * sqrt(2 / (replicates - 1)))
    cdf = stats.norm(lim.mu, sd).cdf
    jitter = stream(seed if jitter_seed is None else jitter_seed, 1).random(replicates) - 0.5
    ks = stats.kstest(v + jitter / sqrt(params.n), cdf).statistic
    ks_raw = stats.kstest(v, cdf).statistic
    return CltResult(float(m), float(var), float(lim.mu), float(lim.sigma2), float(mean_z), float(var_z),
                     float(ks), float(ks_raw), replicates)


def check_clt(n: int = 2000, replicates: int = 2000, seed: int = 20240611,
              cases=((0.7, 0.6, 0.3), (0.6, 0.7, 0.5), (0.8, 0.3, 0.2)), u: float = 0.5) -> list:
    out = []
    for phi, gamma, theta in cases:
        p = validate_params(phi, gamma, n)
        r = clt_check(p, theta, u, replicates, seed)
        tag = f"n={n} phi={phi:g} gamma={gamma:g} theta={theta:g} seed={seed}"
        out.append(_result("clt:mean", tag, abs(r.mean_z), 3.0, f"mean {r.mean:.5g} vs {r.mu:.5g}"))
        out.append(_result("clt:variance", tag, abs(r.var_z), 3.0, f"variance {r.variance:.5g} vs {r.sigma2:.5g}"))
        ks_tol = 1.63 / sqrt(replicates)
        out.append(_result("clt:ks", tag, r.ks, ks_tol, "1% critical value"))
    return out


SUITES = {
    "kernel": lambda **kw: check_kernel_equivalence(**kw),
    "kernel-exact": lambda **kw: check_kernel_equivalence(exact=True, **kw),
    "reversibility": lambda **kw: check_reversibility(**kw),
    "lumping": lambda **kw: check_lumping(**kw),
    "zlaw": lambda **kw: check_z_law(**kw),
    "moments": lambda **kw: check_moments(**kw),
    "clt": lambda **kw: check_clt(),
}
DEFAULT_SUITES = ("kernel", "kernel-exact", "reversibility", "lumping", "zlaw", "moments")


def run_suites(names=DEFAULT_SUITES, perturb_kappa: float | None = None) -> dict:
    """Run the named suites; returns a JSON-ready report."""
    results, timings = [], {}
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
        start = time.perf_counter()
        if name == "reversibility" and perturb_kappa:
            batch = check_reversibility(perturb=perturb_toward_ones(perturb_kappa))
        else:
            batch = SUITES[name]()
        timings[name] = time.perf_counter() - start
        results.extend(batch)
    summary = {}
    for r in results:
        s = summary.setdefault(r.suite, {"checks": 0, "failed": 0, "max_deviation": 0.0})
        s["checks"] += 1
        s["failed"] += int(not r.passed)
        s["max_deviation"] = max(s["max_deviation"], r.deviation)
    return {
        "passed": all(r.passed for r in results),
        "suites": summary,
        "seconds": timings,
        "checks": [r.to_dict() for r in results],
    }
