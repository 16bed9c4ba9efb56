"""Parameters, hypercube states and per-transition counts.

States are 0/1 vectors of length ``n``.  When a state is written as a string,
coordinate 1 is the leftmost character.  Integer indices of states (used for
dense kernels and explicit latent tables) read that string in base 2, so
coordinate 1 is the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .exceptions import LengthMismatch, ParamDegenerate, ParamDomain

MAX_N = 2**20


def is_exact(*values) -> bool:
    """True when every value is a rational number (int or Fraction), not a float."""
    return all(isinstance(v, Rational) for v in values)


def _as_probability(value, name):
    if not isinstance(value, Rational):
        value = float(value)
    if not 0 <= value <= 1:
        raise ParamDomain(f"{name}={value} is not a probability in [0, 1]")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Coordinate-transition parameters of a walk in the class.

    ``phi`` is the Bernoulli parameter reached after one step from a product
    Bernoulli(``gamma``) state.  Fractions are kept exact, anything else is
    stored as a double.
    """

    phi: float
    gamma: float
    n: int

    @property
    def alpha(self):
        return min(self.phi, self.gamma)

    @property
    def psi(self):
        if self.phi <= self.gamma:
            return self.phi / self.gamma
        return (1 - self.phi) / (1 - self.gamma)

    @property
    def exact(self) -> bool:
        return is_exact(self.phi, self.gamma)

    @property
    def boundary(self) -> bool:
        """True at the degenerate endpoints phi or gamma in {0, 1}."""
        return self.phi in (0, 1) or self.gamma in (0, 1)

    @property
    def odds(self):
        """alpha / (1 - alpha), the upper end of the eigenvalue interval."""
        return self.alpha / (1 - self.alpha)

    def swapped(self) -> "ModelParams":
        return ModelParams(self.gamma, self.phi, self.n)


def validate_params(phi, gamma, n: int, max_n: int = MAX_N) -> ModelParams:
    """Check ``(phi, gamma, n)`` and return the parameter record.

    Raises
    ------
    ParamDomain
        If either value is not a probability, ``n`` is out of range, or
        ``phi + gamma < 1``.
    ParamDegenerate
        If ``gamma == 0`` or ``phi == gamma == 1``.
    """
    phi = _as_probability(phi, "phi")
    gamma = _as_probability(gamma, "gamma")
    if int(n) != n or n < 1:
        raise ParamDomain(f"n={n} must be a positive integer")
    n = int(n)
    if n > max_n:
        raise ParamDomain(f"n={n} exceeds the configured maximum {max_n}")
    if gamma == 0:
        raise ParamDegenerate("gamma == 0: the ratio (1 - phi) / gamma is undefined")
    if phi + gamma < 1:
        raise ParamDomain(
            f"phi + gamma = {phi + gamma} < 1; relabel 0 <-> 1 in the data, i.e. "
            f"use phi' = 1 - phi = {1 - phi} and gamma' = 1 - gamma = {1 - gamma}"
        )
    if phi == 1 and gamma == 1:
        raise ParamDegenerate("phi == gamma == 1: alpha / (1 - alpha) is undefined")
    return ModelParams(phi, gamma, n)


def kappa_range(phi, gamma) -> tuple:
    """Admissible interval ``(lo, hi)`` of the single-coordinate eigenvalue."""
    phi = _as_probability(phi, "phi")
    gamma = _as_probability(gamma, "gamma")
    alpha = min(phi, gamma)
    if alpha == 1:
        raise ParamDegenerate("alpha == 1: the interval is unbounded")
    hi = alpha / (1 - alpha)
    if phi + gamma >= 1:
        return (-1 if is_exact(phi, gamma) else -1.0), hi
    return -phi * gamma / ((1 - phi) * (1 - gamma)), hi


class HyperState:
    """An immutable point of {0, 1}^n with its cached Hamming weight."""

    __slots__ = ("_bits", "_hamming")

    def __init__(self, bits):
        arr = np.array(bits, dtype=np.uint8).reshape(-1)
        if arr.size and arr.max() > 1:
            raise ValueError("state entries must be 0 or 1")
        arr.setflags(write=False)
        self._bits = arr
        self._hamming = int(arr.sum(dtype=np.int64))

    @classmethod
    def from_string(cls, text: str) -> "HyperState":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {text!r}")
        return cls(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"))

    @classmethod
    def zeros(cls, n: int) -> "HyperState":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def ones(cls, n: int) -> "HyperState":
        return cls(np.ones(n, dtype=np.uint8))

    @classmethod
    def from_index(cls, index: int, n: int) -> "HyperState":
        return cls(index_to_bits(index, n))

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def hamming(self) -> int:
        return self._hamming

    @property
    def n(self) -> int:
        return self._bits.size

    @property
    def index(self) -> int:
        return bits_to_index(self._bits)

    def __len__(self):
        return self._bits.size

    def __eq__(self, other):
        if not isinstance(other, HyperState):
            return NotImplemented
        return np.array_equal(self._bits, other._bits)

    def __hash__(self):
        return hash(self._bits.tobytes())

    def __str__(self):
        return (self._bits + ord("0")).tobytes().decode("ascii")

    def __repr__(self):
        return f"HyperState('{self}')"

    def inner(self, other: "HyperState") -> int:
        _check_same_length(self, other)
        return int(np.dot(self._bits.astype(np.int64), other._bits))


def _check_same_length(x, y):
    if len(x) != len(y):
        raise LengthMismatch(f"state lengths differ: {len(x)} != {len(y)}")


def bits_to_index(bits) -> int:
    out = 0
    for b in np.asarray(bits, dtype=np.uint8):
        out = (out << 1) | int(b)
    return out


def index_to_bits(index: int, n: int) -> np.ndarray:
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((int(index) >> shifts) & 1).astype(np.uint8)


def all_states(n: int) -> np.ndarray:
    """All ``2**n`` states as rows of a uint8 matrix, in index order."""
    idx = np.arange(2**n, dtype=np.int64)[:, None]
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)[None, :]
    return ((idx >> shifts) & 1).astype(np.uint8)


def popcounts(n: int) -> np.ndarray:
    """Hamming weight of every index ``0 .. 2**n - 1``."""
    return all_states(n).sum(axis=1, dtype=np.int64)


@dataclass(frozen=True)
class TransitionCounts:
    """Numbers of coordinates moving ``a -> b`` in one step."""

    n00: int
    n01: int
    n10: int
    n11: int

    @property
    def n(self) -> int:
        return self.n00 + self.n01 + self.n10 + self.n11

    @property
    def n0_(self) -> int:
        return self.n00 + self.n01

    @property
    def n1_(self) -> int:
        return self.n10 + self.n11

    def as_tuple(self):
        return (self.n00, self.n01, self.n10, self.n11)

    @classmethod
    def from_norms(cls, n: int, x_weight: int, y_weight: int, inner: int) -> "TransitionCounts":
        """Counts from ``(||x||, ||y||, <x, y>)``."""
        return cls(n - x_weight - y_weight + inner, y_weight - inner, x_weight - inner, inner)


def transition_counts(x: HyperState, y: HyperState) -> TransitionCounts:
    _check_same_length(x, y)
    xb = x.bits.astype(bool)
    yb = y.bits.astype(bool)
    return TransitionCounts(
        n00=int(np.count_nonzero(~xb & ~yb)),
        n01=int(np.count_nonzero(~xb & yb)),
        n10=int(np.count_nonzero(xb & ~yb)),
        n11=int(np.count_nonzero(xb & yb)),
    )


@dataclass(frozen=True, eq=False)
class SamplePath:
    """States ``x_0 .. x_T`` stored as a ``(T + 1, n)`` uint8 array."""

    states: np.ndarray
    params: ModelParams | None = None
    latent_log: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        arr = np.asarray(self.states, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("states must be a 2-d array (time x coordinate)")
        if self.params is not None and arr.shape[1] != self.params.n:
            raise LengthMismatch(f"state length {arr.shape[1]} != n={self.params.n}")
        arr.setflags(write=False)
        object.__setattr__(self, "states", arr)

    @classmethod
    def from_states(cls, states, params=None) -> "SamplePath":
        rows = []
        for s in states:
            if isinstance(s, str):
                s = HyperState.from_string(s)
            rows.append(s.bits if isinstance(s, HyperState) else np.asarray(s, dtype=np.uint8))
        lengths = {len(r) for r in rows}
        if len(lengths) > 1:
            raise LengthMismatch(f"states have different lengths: {sorted(lengths)}")
        return cls(np.vstack(rows), params)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def hamming(self) -> np.ndarray:
        return self.states.sum(axis=1, dtype=np.int64)

    def __len__(self):
        return self.states.shape[0]

    def __getitem__(self, t) -> HyperState:
        return HyperState(self.states[t])

    def __iter__(self):
        for row in self.states:
            yield HyperState(row)


def to_fraction(value):
    """Exact rational copy of a number (floats are converted exactly)."""
    return value if isinstance(value, Rational) else Fraction(value)
