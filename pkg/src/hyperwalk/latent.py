"""Laws for the latent binary vector that drives one transition.

Conditionally on the latent vector ``Z``, coordinates of the walk update
independently.  Four families are provided:

``IidTheta``
    coordinates i.i.d. Bernoulli(theta);
``DeFinetti``
    theta drawn from a mixing law (Beta or a finite grid), then i.i.d. coordinates;
``ExtremePoint``
    exactly ``M`` ones at uniformly random positions;
``ExplicitPmf``
    an arbitrary table over all ``2**n`` states (``n <= 20``).

The first three are exchangeable and can be used at any dimension.  Sampling
always takes an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from numbers import Rational

import numpy as np
from scipy import stats

from .core import HyperState, all_states, is_exact, popcounts
from .exceptions import ConfigError, LengthMismatch

MAX_EXPLICIT_N = 20


@dataclass(frozen=True)
class ThetaDraw:
    """The mixing frequency used for one latent draw."""

    theta: float
    source: str


class LatentModel:
    """Common interface of the latent families."""

    exchangeable = True
    name = "latent"

    def check_dimension(self, n: int) -> int:
        if n < 1:
            raise LengthMismatch("dimension must be positive")
        return int(n)

    def sample(self, rng: np.random.Generator, n: int, size: int = 1):
        """Draw ``size`` latent vectors.

        Returns
        -------
        z : ndarray of uint8, shape (size, n)
        theta : ndarray of float, shape (size,), or None when the family has
            no mixing frequency.
        """
        raise NotImplementedError

    def hamming_pmf(self, n: int) -> np.ndarray:
        """Exact law of ``||Z||`` on ``0 .. n``."""
        raise NotImplementedError

    def coordinate_means(self, n: int) -> np.ndarray:
        """``E[Z[k]]`` for every coordinate."""
        raise NotImplementedError

    def covariance(self, n: int) -> np.ndarray:
        """``Cov(Z[k], Z[l])`` as an ``n x n`` matrix."""
        raise NotImplementedError

    def mean_frequency(self, n: int):
        """Average coordinate mean, the de Finetti ``theta`` tilde for exchangeable laws."""
        return self.coordinate_means(n).mean()

    def subset_pmf(self, n: int) -> np.ndarray:
        """Probability of every state in index order (for ``n <= 20``).

        Exchangeable laws spread each Hamming-weight mass evenly over the
        states of that weight.
        """
        self.check_dimension(n)
        if n > MAX_EXPLICIT_N:
            raise LengthMismatch(f"n={n} too large for a full state table")
        h = self.hamming_pmf(n)
        weights = popcounts(n)
        per_state = np.array([h[m] / comb(n, m) for m in range(n + 1)], dtype=h.dtype)
        return per_state[weights]

    def to_config(self) -> dict:
        raise NotImplementedError


def _exchangeable_covariance(n, mean, pair_moment, dtype):
    """Covariance of an exchangeable law from ``E[Z_k]`` and ``E[Z_k Z_l]``."""
    off = pair_moment - mean * mean
    cov = np.full((n, n), off, dtype=dtype)
    for k in range(n):
        cov[k, k] = mean * (1 - mean)
    return cov


def _binomial_pmf(n, p):
    if is_exact(p):
        p = Fraction(p)
        return np.array([comb(n, m) * p**m * (1 - p) ** (n - m) for m in range(n + 1)], dtype=object)
    return stats.binom.pmf(np.arange(n + 1), n, float(p))


@dataclass(frozen=True)
class IidTheta(LatentModel):
    """Coordinates i.i.d. Bernoulli(``theta``)."""

    theta: float
    name = "iid"

    def __post_init__(self):
        if not 0 <= self.theta <= 1:
            raise ConfigError(f"theta={self.theta} is not a probability")

    def sample(self, rng, n, size=1):
        self.check_dimension(n)
        z = (rng.random((size, n)) < float(self.theta)).astype(np.uint8)
        return z, None

    def hamming_pmf(self, n):
        return _binomial_pmf(self.check_dimension(n), self.theta)

    def coordinate_means(self, n):
        dtype = object if is_exact(self.theta) else float
        return np.full(n, self.theta, dtype=dtype)

    def covariance(self, n):
        dtype = object if is_exact(self.theta) else float
        return _exchangeable_covariance(n, self.theta, self.theta**2, dtype)

    def to_config(self):
        return {"variant": "iid", "theta": float(self.theta)}


@dataclass(frozen=True)
class DeFinetti(LatentModel):
    """Mixture of i.i.d. laws: ``theta ~ nu`` then Bernoulli(theta) coordinates.

    ``nu`` is Beta(``a``, ``b``) unless ``grid`` and ``weights`` are given, in
    which case it is the discrete law on the grid points.
    """

    a: float | None = None
    b: float | None = None
    grid: tuple | None = None
    weights: tuple | None = None
    name = "definetti"

    def __post_init__(self):
        if self.grid is None:
            if self.a is None or self.b is None or self.a <= 0 or self.b <= 0:
                raise ConfigError("Beta mixing needs positive a and b")
            return
        grid = tuple(self.grid)
        weights = tuple(self.weights) if self.weights is not None else (1 / len(grid),) * len(grid)
        if len(grid) == 0 or len(grid) != len(weights):
            raise ConfigError("grid and weights must be non-empty and of equal length")
        if any(not 0 <= g <= 1 for g in grid) or any(w < 0 for w in weights):
            raise ConfigError("grid points must be probabilities and weights nonnegative")
        total = sum(weights)
        if abs(total - 1) > 1e-12:
            raise ConfigError(f"mixing weights sum to {total}, not 1")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def beta(cls, a, b) -> "DeFinetti":
        return cls(a=a, b=b)

    @classmethod
    def from_grid(cls, points, weights=None) -> "DeFinetti":
        return cls(grid=tuple(points), weights=None if weights is None else tuple(weights))

    @property
    def is_beta(self) -> bool:
        return self.grid is None

    @property
    def exact(self) -> bool:
        if self.is_beta:
            return is_exact(self.a, self.b)
        return is_exact(*self.grid, *self.weights)

    def theta_moment(self, j: int):
        """``E[theta**j]`` under the mixing law."""
        if self.is_beta:
            out = Fraction(1) if self.exact else 1.0
            for i in range(j):
                out = out * (self.a + i) / (self.a + self.b + i)
            return out
        return sum(w * g**j for g, w in zip(self.grid, self.weights))

    def sample_theta(self, rng, size=1) -> np.ndarray:
        if self.is_beta:
            return rng.beta(float(self.a), float(self.b), size=size)
        idx = rng.choice(len(self.grid), size=size, p=np.asarray(self.weights, dtype=float))
        return np.asarray(self.grid, dtype=float)[idx]

    def sample(self, rng, n, size=1):
        self.check_dimension(n)
        theta = self.sample_theta(rng, size)
        z = (rng.random((size, n)) < theta[:, None]).astype(np.uint8)
        return z, theta

    def hamming_pmf(self, n):
        self.check_dimension(n)
        if self.is_beta:
            if self.exact:
                a, b = Fraction(self.a), Fraction(self.b)
                return np.array(
                    [comb(n, m) * _rising(a, m) * _rising(b, n - m) / _rising(a + b, n) for m in range(n + 1)],
                    dtype=object,
                )
            return stats.betabinom.pmf(np.arange(n + 1), n, float(self.a), float(self.b))
        out = None
        for g, w in zip(self.grid, self.weights):
            term = w * _binomial_pmf(n, g)
            out = term if out is None else out + term
        return out

    def coordinate_means(self, n):
        mean = self.theta_moment(1)
        return np.full(n, mean, dtype=object if self.exact else float)

    def covariance(self, n):
        dtype = object if self.exact else float
        return _exchangeable_covariance(n, self.theta_moment(1), self.theta_moment(2), dtype)

    def to_config(self):
        if self.is_beta:
            return {"variant": "definetti", "a": float(self.a), "b": float(self.b)}
        return {"variant": "definetti", "grid": [float(g) for g in self.grid],
                "weights": [float(w) for w in self.weights]}


def _rising(x, m):
    out = Fraction(1)
    for i in range(m):
        out *= x + i
    return out


@dataclass(frozen=True)
class ExtremePoint(LatentModel):
    """Exactly ``M`` ones, placed uniformly at random."""

    M: int
    name = "extreme"

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 0:
            raise ConfigError(f"M={self.M} must be a nonnegative integer")

    def check_dimension(self, n):
        n = super().check_dimension(n)
        if self.M > n:
            raise LengthMismatch(f"M={self.M} ones do not fit in dimension {n}")
        return n

    def sample(self, rng, n, size=1):
        self.check_dimension(n)
        z = np.zeros((size, n), dtype=np.uint8)
        if self.M == 0:
            return z, None
        keys = rng.random((size, n))
        pos = np.argpartition(keys, self.M - 1, axis=1)[:, : self.M]
        np.put_along_axis(z, pos, 1, axis=1)
        return z, None

    def hamming_pmf(self, n):
        self.check_dimension(n)
        out = np.zeros(n + 1)
        out[self.M] = 1.0
        return out

    def coordinate_means(self, n):
        self.check_dimension(n)
        return np.full(n, self.M / n)

    def covariance(self, n):
        self.check_dimension(n)
        mean = self.M / n
        pair = self.M * (self.M - 1) / (n * (n - 1)) if n > 1 else 0.0
        return _exchangeable_covariance(n, mean, pair, float)

    def to_config(self):
        return {"variant": "extreme", "M": int(self.M)}


@dataclass(frozen=True, eq=False)
class ExplicitPmf(LatentModel):
    """Arbitrary law given as a table over the ``2**n`` states in index order.

    Entries may be Fractions, in which case every derived quantity is exact.
    """

    probs: np.ndarray
    name = "explicit"
    exchangeable = False

    def __post_init__(self):
        exact = all(isinstance(p, Rational) for p in np.asarray(self.probs, dtype=object).ravel())
        arr = np.array(self.probs, dtype=object if exact else float).reshape(-1)
        size = arr.size
        n = size.bit_length() - 1
        if size < 2 or 2**n != size:
            raise ConfigError(f"table length {size} is not 2**n for n >= 1")
        if n > MAX_EXPLICIT_N:
            raise ConfigError(f"explicit tables are limited to n <= {MAX_EXPLICIT_N}")
        if any(p < 0 for p in arr):
            raise ConfigError("probabilities must be nonnegative")
        total = arr.sum()
        if abs(total - 1) > 1e-12:
            raise ConfigError(f"probabilities sum to {float(total)}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @classmethod
    def point_mass(cls, state, exact=True) -> "ExplicitPmf":
        if isinstance(state, str):
            state = HyperState.from_string(state)
        elif not isinstance(state, HyperState):
            state = HyperState(state)
        n = state.n
        arr = np.zeros(2**n, dtype=object) if exact else np.zeros(2**n)
        arr[:] = Fraction(0) if exact else 0.0
        arr[state.index] = Fraction(1) if exact else 1.0
        return cls(arr)

    @classmethod
    def from_mapping(cls, n: int, table: dict) -> "ExplicitPmf":
        """Build from ``{"0101": prob, ...}``; missing states get probability 0."""
        exact = all(isinstance(v, Rational) for v in table.values())
        arr = np.zeros(2**n, dtype=object if exact else float)
        if exact:
            arr[:] = Fraction(0)
        for key, value in table.items():
            state = HyperState.from_string(key)
            if state.n != n:
                raise LengthMismatch(f"state {key!r} does not have length {n}")
            arr[state.index] += value
        return cls(arr)

    @property
    def n(self) -> int:
        return self.probs.size.bit_length() - 1

    @property
    def exact(self) -> bool:
        return self.probs.dtype == object

    def check_dimension(self, n):
        if n != self.n:
            raise LengthMismatch(f"model has dimension {self.n}, got n={n}")
        return n

    def sample(self, rng, n, size=1):
        self.check_dimension(n)
        idx = rng.choice(self.probs.size, size=size, p=self.probs.astype(float))
        states = all_states(n)
        return states[idx], None

    def subset_pmf(self, n):
        self.check_dimension(n)
        return self.probs

    def hamming_pmf(self, n):
        self.check_dimension(n)
        weights = popcounts(n)
        if self.exact:
            out = np.array([Fraction(0)] * (n + 1), dtype=object)
            for w, p in zip(weights, self.probs):
                out[w] += p
            return out
        return np.bincount(weights, weights=self.probs, minlength=n + 1)

    def coordinate_means(self, n):
        self.check_dimension(n)
        return all_states(n).T.astype(self.probs.dtype) @ self.probs

    def covariance(self, n):
        self.check_dimension(n)
        s = all_states(n).astype(self.probs.dtype)
        mean = s.T @ self.probs
        second = (s * self.probs[:, None]).T @ s
        return second - np.outer(mean, mean)

    def to_config(self):
        return {"variant": "explicit", "pmf": [float(p) for p in self.probs]}


def sample_z(model: LatentModel, n: int, rng: np.random.Generator):
    """One latent draw as ``(HyperState, ThetaDraw or None)``."""
    z, theta = model.sample(rng, n, 1)
    draw = None if theta is None else ThetaDraw(float(theta[0]), model.name)
    return HyperState(z[0]), draw


def hamming_pmf(model: LatentModel, n: int) -> np.ndarray:
    """Exact law of ``||Z||`` for any latent family."""
    return model.hamming_pmf(n)


def from_config(config: dict) -> LatentModel:
    """Build a latent model from a JSON-style mapping.

    Recognised forms::

        {"variant": "iid", "theta": 0.3}
        {"variant": "definetti", "a": 2, "b": 5}
        {"variant": "definetti", "grid": [0.2, 0.8], "weights": [0.5, 0.5]}
        {"variant": "extreme", "M": 3}
        {"variant": "explicit", "pmf": [...]}          # 2**n entries, index order
        {"variant": "explicit", "n": 2, "states": {"01": 0.5, "10": 0.5}}
    """
    if not isinstance(config, dict) or "variant" not in config:
        raise ConfigError("latent config must be an object with a 'variant' field")
    variant = config["variant"]
    try:
        if variant == "iid":
            return IidTheta(config["theta"])
        if variant == "definetti":
            if "grid" in config:
                return DeFinetti.from_grid(config["grid"], config.get("weights"))
            return DeFinetti.beta(config["a"], config["b"])
        if variant == "extreme":
            return ExtremePoint(config["M"])
        if variant == "explicit":
            if "states" in config:
                return ExplicitPmf.from_mapping(int(config["n"]), config["states"])
            return ExplicitPmf(np.asarray(config["pmf"], dtype=float))
    except KeyError as exc:
        raise ConfigError(f"latent variant {variant!r} is missing field {exc.args[0]!r}") from None
    raise ConfigError(f"unknown latent variant {variant!r}")
