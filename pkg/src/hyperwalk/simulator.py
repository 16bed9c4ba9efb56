"""Path generation.

Given the latent vector ``Z_t``, every coordinate is updated independently
with one uniform variate ``U(t, k)``:

* ``Z[k] = 1``: a 0 becomes 1; a 1 stays 1 when ``U >= (1-phi)/gamma``.
* ``Z[k] = 0`` and ``phi < gamma``: a 0 stays 0; a 1 becomes 0 when ``U >= psi``.
* ``Z[k] = 0`` and ``phi > gamma``: a 1 stays 1; a 0 becomes 1 when ``U >= psi``.
* ``Z[k] = 0`` and ``phi == gamma``: the coordinate is held.

The comparisons are written as ``U >= threshold`` exactly as above; for
continuous uniforms the choice of ``>=`` or ``<`` only matters on a null set.

Within a step the latent vector is drawn first, then ``n`` uniforms in
coordinate order.  Vectorised ("batch") functions accept arrays of shape
``(..., n)`` and advance many independent chains with one generator.
"""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil, log

import numpy as np

from .core import HyperState, ModelParams, SamplePath, validate_params
from .exceptions import Boundary, ConfigError, LengthMismatch, ProbabilityRange
from .latent import DeFinetti, LatentModel, from_config
from .rng import stream

CLAMP_TOL = 1e-10
LIMIT_TOL = 1e-12
MAX_TRUNCATION = 10_000


def _bits(state) -> np.ndarray:
    if isinstance(state, HyperState):
        return state.bits
    return np.asarray(state, dtype=np.uint8)


def _check_lengths(*arrays):
    lengths = {a.shape[-1] for a in arrays}
    if len(lengths) > 1:
        raise LengthMismatch(f"state lengths differ: {sorted(lengths)}")


# ---------------------------------------------------------------------------
# one step


def apply_rules(x, z, u, params: ModelParams) -> np.ndarray:
    """Coordinate rules for arrays ``x``, ``z`` (0/1) and uniforms ``u`` of equal shape."""
    x = np.asarray(x).astype(bool)
    z = np.asarray(z).astype(bool)
    phi, gamma = float(params.phi), float(params.gamma)
    keep_one = u >= (1 - phi) / gamma
    with_z = ~x | keep_one
    if phi < gamma:
        without_z = x & ~(u >= params.psi)
    elif phi > gamma:
        without_z = x | (u >= params.psi)
    else:
        without_z = x
    return np.where(z, with_z, without_z).astype(np.uint8)


def autoregressive_coefficients(z, u, params: ModelParams):
    """``(A, B)`` with ``X_t = A X_{t-1} + B (1 - X_{t-1})``.

    ``Z = 1``: ``A = [U > (1-phi)/gamma]``, ``B = 1``.
    ``Z = 0``, ``phi <= gamma``: ``A = [U <= phi/gamma]``, ``B = 0``.
    ``Z = 0``, ``phi > gamma``: ``A = 1``, ``B = [U > (1-phi)/(1-gamma)]``.
    """
    z = np.asarray(z).astype(bool)
    phi, gamma = float(params.phi), float(params.gamma)
    a1 = u > (1 - phi) / gamma
    if phi <= gamma:
        a0 = u <= phi / gamma
        b0 = np.zeros_like(z)
    else:
        a0 = np.ones_like(z)
        b0 = u > params.psi
    a = np.where(z, a1, a0).astype(np.uint8)
    b = np.where(z, True, b0).astype(np.uint8)
    return a, b


def step(x, z, params: ModelParams, rng: np.random.Generator) -> HyperState:
    """One transition ``x -> y`` given the latent vector ``z``.

    Raises
    ------
    LengthMismatch
        If ``x``, ``z`` and ``params.n`` disagree.
    """
    xb, zb = _bits(x), _bits(z)
    _check_lengths(xb, zb, np.empty(params.n))
    u = rng.random(xb.shape[-1])
    return HyperState(apply_rules(xb, zb, u, params))


def step_autoregressive(x, z, params: ModelParams, rng: np.random.Generator):
    """One transition through the autoregressive form; returns ``(y, A, B)``."""
    xb, zb = _bits(x), _bits(z)
    _check_lengths(xb, zb, np.empty(params.n))
    u = rng.random(xb.shape[-1])
    a, b = autoregressive_coefficients(zb, u, params)
    y = a * xb + b * (1 - xb)
    return HyperState(y), HyperState(a), HyperState(b)


def step_batch(x: np.ndarray, model: LatentModel, params: ModelParams, rng: np.random.Generator):
    """Advance each row of ``x`` (shape ``(R, n)``) by one step with fresh latent draws.

    Returns ``(y, z, theta)``.
    """
    x = np.asarray(x, dtype=np.uint8)
    rows, n = x.shape
    z, theta = model.sample(rng, n, rows)
    u = rng.random((rows, n))
    return apply_rules(x, z, u, params), z, theta


# ---------------------------------------------------------------------------
# conditional probabilities and the limit law


def _clamp_probabilities(p: np.ndarray) -> np.ndarray:
    low, high = p.min(initial=0.0), p.max(initial=1.0)
    if low < -CLAMP_TOL or high > 1 + CLAMP_TOL:
        raise ProbabilityRange(f"probability left [0, 1]: range [{low:.3g}, {high:.3g}]")
    return np.clip(p, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class ConditionalBernoulli:
    """``p[k] = P(X_t[k] = 1 | Z_1 .. Z_t, X_0)``; coordinates are conditionally independent."""

    p: np.ndarray

    def sample(self, rng: np.random.Generator) -> HyperState:
        return HyperState(rng.random(self.p.shape[-1]) < self.p)


def conditional_bernoulli(x0, z_path, params: ModelParams) -> ConditionalBernoulli:
    """Conditional success probabilities after ``t = len(z_path)`` steps.

    ``p_t = phi - (gamma - phi) sum_{l=1}^t psi^l prod_{j=t-l+1}^t (1 - Z_j/alpha)
    - (phi - x0) psi^t prod_{j=1}^t (1 - Z_j/alpha)``

    The sum and the product are accumulated forward in ``t``.
    """
    x0 = _bits(x0).astype(float)
    phi, gamma, alpha, psi = (float(v) for v in (params.phi, params.gamma, params.alpha, params.psi))
    tail_sum = np.zeros_like(x0)
    full_product = np.ones_like(x0)
    for z in z_path:
        zb = _bits(z)
        _check_lengths(zb, x0)
        factor = psi * (1 - zb / alpha)
        tail_sum = factor * (1 + tail_sum)
        full_product = factor * full_product
    p = phi - (gamma - phi) * tail_sum - (phi - x0) * full_product
    return ConditionalBernoulli(_clamp_probabilities(p))


def limit_truncation(params: ModelParams, tol: float = LIMIT_TOL) -> int:
    """Smallest ``L`` with ``rho^L <= tol`` where ``rho = max(psi, (1-phi)/gamma)``, capped at 10**4.

    ``rho`` bounds the magnitude of each factor ``psi (1 - Z/alpha)`` of the
    limit series.

    Raises
    ------
    Boundary
        If ``phi + gamma == 1`` (no geometric decay).
    """
    phi, gamma = float(params.phi), float(params.gamma)
    if phi + gamma <= 1:
        raise Boundary("phi + gamma == 1: the limit series does not decay")
    rho = max(float(params.psi) if phi != gamma else 0.0, (1 - phi) / gamma)
    if rho == 0:
        return 1
    return min(MAX_TRUNCATION, max(1, ceil(log(tol) / log(rho))))


def limit_probabilities(params: ModelParams, model: LatentModel, rng: np.random.Generator,
                        size: int = 1, truncation: int | None = None) -> np.ndarray:
    """Draw ``size`` vectors of limit-law success probabilities (shape ``(size, n)``).

    ``p = phi - (gamma - phi) sum_{l=1}^L prod_{j=1}^l psi (1 - Z_j/alpha)``
    with ``L`` i.i.d. latent draws, evaluated in Horner form.
    """
    n = params.n
    phi, gamma = float(params.phi), float(params.gamma)
    if phi == gamma:
        limit_truncation(params)
        return np.full((size, n), phi)
    L = truncation if truncation is not None else limit_truncation(params)
    alpha, psi = float(params.alpha), float(params.psi)
    acc = np.zeros((size, n))
    # Horner from the innermost factor outwards; the draws are i.i.d., so the
    # ones made first are the deepest in the series
    for _ in range(L):
        z = model.sample(rng, n, size)[0]
        acc = psi * (1 - z / alpha) * (1 + acc)
    return _clamp_probabilities(phi - (gamma - phi) * acc)


def sample_limit(params: ModelParams, model: LatentModel, rng: np.random.Generator,
                 truncation: int | None = None) -> HyperState:
    """One draw from the stationary law of the walk.

    Raises
    ------
    Boundary
        If ``phi + gamma == 1``.
    """
    p = limit_probabilities(params, model, rng, 1, truncation)[0]
    return HyperState(rng.random(params.n) < p)


def sample_limit_batch(params: ModelParams, model: LatentModel, rng: np.random.Generator,
                       size: int, truncation: int | None = None) -> np.ndarray:
    """``size`` independent stationary draws as a ``(size, n)`` uint8 array."""
    p = limit_probabilities(params, model, rng, size, truncation)
    return (rng.random(p.shape) < p).astype(np.uint8)


# ---------------------------------------------------------------------------
# full paths


INITIAL_KINDS = ("gamma", "limit")


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Everything needed to reproduce a simulation.

    Attributes
    ----------
    params : ModelParams
    latent : LatentModel or sequence of LatentModel
        One model reused at every step, or one model per transition.
    steps : int
    seed : int
    replicates : int
    initial : "gamma", "limit", or a HyperState
        Product Bernoulli(gamma), a draw from the stationary law, or a fixed
        start.
    """

    params: ModelParams
    latent: LatentModel | Sequence
    steps: int
    seed: int
    replicates: int = 1
    initial: str | HyperState = "gamma"
    log_latent: bool = True
    extra: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 0:
            raise ConfigError("steps must be a nonnegative integer")
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ConfigError("replicates must be a positive integer")
        if self.seed is None:
            raise ConfigError("a seed is required")
        if not isinstance(self.latent, LatentModel):
            models = tuple(self.latent)
            if len(models) != self.steps:
                raise ConfigError(f"{len(models)} latent models given for {self.steps} steps")
            object.__setattr__(self, "latent", models)
        if isinstance(self.initial, HyperState):
            if self.initial.n != self.params.n:
                raise LengthMismatch("initial state length differs from n")
        elif self.initial not in INITIAL_KINDS:
            raise ConfigError(f"initial must be one of {INITIAL_KINDS} or a 0/1 string")

    def model_at(self, t: int) -> LatentModel:
        """Latent model for the transition into time ``t`` (``t >= 1``)."""
        if isinstance(self.latent, LatentModel):
            return self.latent
        return self.latent[t - 1]

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        """Read the JSON form::

            {"phi": 0.7, "gamma": 0.6, "n": 100, "steps": 50, "seed": 1,
             "replicates": 1, "initial": "gamma" | "limit" | "0101...",
             "latent": {"variant": ...} or [ {...}, ... ]}
        """
        try:
            params = validate_params(data["phi"], data["gamma"], int(data["n"]))
            latent = data["latent"]
            steps = int(data.get("steps", 0))
            seed = data["seed"]
        except KeyError as exc:
            raise ConfigError(f"simulation config is missing field {exc.args[0]!r}") from None
        model = [from_config(m) for m in latent] if isinstance(latent, list) else from_config(latent)
        initial = data.get("initial", "gamma")
        if initial not in INITIAL_KINDS:
            try:
                initial = HyperState.from_string(initial)
            except (ValueError, AttributeError):
                raise ConfigError(f"invalid initial state {initial!r}") from None
        return cls(params, model, steps, int(seed), int(data.get("replicates", 1)), initial,
                   bool(data.get("log_latent", True)))


def _initial_state(config: SimConfig, rng) -> np.ndarray:
    p = config.params
    if isinstance(config.initial, HyperState):
        return config.initial.bits.copy()
    if config.initial == "gamma":
        return (rng.random(p.n) < float(p.gamma)).astype(np.uint8)
    return sample_limit(p, config.model_at(1), rng).bits.copy()


def simulate_path(config: SimConfig, replicate: int = 0) -> SamplePath:
    """Simulate replicate ``replicate`` of ``config`` on its own random stream.

    The latent log (when enabled) holds ``hamming`` (``||Z_t||`` for
    ``t = 1 .. T``) and ``theta`` (mixing frequencies, or None).
    """
    rng = stream(config.seed, replicate)
    p = config.params
    states = np.empty((config.steps + 1, p.n), dtype=np.uint8)
    states[0] = _initial_state(config, rng)
    z_weights = np.empty(config.steps, dtype=np.int64)
    thetas = np.full(config.steps, np.nan)
    has_theta = False
    for t in range(1, config.steps + 1):
        z, theta = config.model_at(t).sample(rng, p.n, 1)
        u = rng.random(p.n)
        states[t] = apply_rules(states[t - 1], z[0], u, p)
        z_weights[t - 1] = int(z.sum())
        if theta is not None:
            thetas[t - 1] = theta[0]
            has_theta = True
    log = None
    if config.log_latent:
        log = {"hamming": z_weights, "theta": thetas if has_theta else None}
    return SamplePath(states, p, log)


def simulate_replicates(config: SimConfig, threads: int = 1) -> list:
    """All replicates of ``config``, in replicate order.

    Each replicate owns the stream ``(seed, replicate)``, so the output does
    not depend on ``threads``.
    """
    indices = range(config.replicates)
    if threads <= 1 or config.replicates == 1:
        return [simulate_path(config, i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda i: simulate_path(config, i), indices))


# ---------------------------------------------------------------------------
# large-n approximation of the Hamming weight


def approx_hamming_path(params, thetas, w0: float) -> np.ndarray:
    """Deterministic approximation of ``||X_t||`` given latent frequencies.

    ``W_t = n (1 - (1 - Theta_t)(1 - phi)/(1 - alpha)) + W_{t-1} psi (1 - Theta_t/alpha)``

    Parameters
    ----------
    params : ModelParams or sequence of ModelParams
        One parameter set, or one per step.
    thetas : array_like, shape (T,)
        ``Theta_1 .. Theta_T`` in (0, 1).
    w0 : float
        Starting value ``W_0``.

    Returns
    -------
    ndarray, shape (T + 1,)
    """
    thetas = np.asarray(thetas, dtype=float)
    if isinstance(params, ModelParams):
        params = [params] * thetas.size
    if len(params) != thetas.size:
        raise LengthMismatch("one parameter set per step is required")
    out = np.empty(thetas.size + 1)
    out[0] = w0
    for t, (p, theta) in enumerate(zip(params, thetas), start=1):
        phi, alpha, psi = float(p.phi), float(p.alpha), float(p.psi)
        out[t] = p.n * (1 - (1 - theta) * (1 - phi) / (1 - alpha)) + out[t - 1] * psi * (1 - theta / alpha)
    return out


def draw_thetas(model: DeFinetti, steps: int, rng: np.random.Generator) -> np.ndarray:
    """``steps`` i.i.d. mixing frequencies from a de Finetti model."""
    return model.sample_theta(rng, steps)
