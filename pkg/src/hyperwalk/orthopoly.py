"""Krawtchouk and Hermite polynomials.

``Q_k(zeta; n, alpha)`` is the Krawtchouk polynomial orthogonal on
Binomial(n, alpha), scaled so ``Q_k(0) = 1``, with generating function

    sum_k C(n, k) Q_k(zeta) s^k = (1 - (1 - alpha) / alpha * s)^zeta (1 + s)^(n - zeta).

``H_k(w; sigma2)`` is the Hermite polynomial orthogonal on N(0, sigma2) with
generating function ``exp(z w - sigma2 z^2 / 2)``.

Both families are evaluated by three-term recurrences.  The Krawtchouk
recurrence in the degree is unstable in double precision once ``n`` reaches a
few dozen (errors grow like ``max(alpha/(1-alpha), (1-alpha)/alpha)^n``), so
floating tables are built in extended binary precision with gmpy2 and rounded
to doubles at the end.  Passing Fractions for the parameters gives exact
rational values through the same code.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, comb, log2

import gmpy2
import numpy as np

from .core import is_exact, to_fraction
from .exceptions import AlphaDegenerate

MAX_TABLE_N = 1000


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise AlphaDegenerate(f"alpha={alpha} must lie strictly inside (0, 1)")


def _working_bits(n, alpha) -> int:
    """Binary precision that keeps the float table accurate to double rounding."""
    alpha = float(alpha)
    spread = max(alpha / (1 - alpha), (1 - alpha) / alpha)
    return 128 + ceil(n * (2 + log2(spread)))


def _recurrence(n, alpha, points, kmax):
    """Rows Q_0 .. Q_kmax evaluated at ``points`` by the degree recurrence.

    alpha (n - k) Q_{k+1} = [alpha (n - k) + k (1 - alpha) - x] Q_k - k (1 - alpha) Q_{k-1}
    """
    if is_exact(alpha):
        return _recurrence_rows(n, alpha, points, kmax, Fraction(1))
    with gmpy2.context(gmpy2.get_context(), precision=_working_bits(n, alpha)):
        rows = _recurrence_rows(n, gmpy2.mpfr(float(alpha)), points, kmax, gmpy2.mpfr(1))
        return rows.astype(float)


def krawtchouk_mp(n: int, alpha) -> np.ndarray:
    """Object table of gmpy2 values at the precision of the caller's context.

    ``alpha`` is converted exactly.  Used by kernel routines whose sums
    cancel too strongly for doubles.
    """
    _check_alpha(alpha)
    return _recurrence_rows(n, gmpy2.mpfr(alpha), range(n + 1), n, gmpy2.mpfr(1))


def _recurrence_rows(n, alpha, points, kmax, one):
    x = np.array([one * p for p in points], dtype=object)
    rows = np.empty((kmax + 1, x.size), dtype=object)
    rows[0] = one
    if kmax >= 1:
        rows[1] = one - x / (n * alpha)
    beta = one - alpha
    for k in range(1, kmax):
        a = alpha * (n - k)
        rows[k + 1] = ((a + k * beta - x) * rows[k] - k * beta * rows[k - 1]) / a
    return rows


@dataclass(frozen=True, eq=False)
class KrawtchoukTable:
    """``values[k, zeta] = Q_k(zeta; n, alpha)`` for ``0 <= k, zeta <= n``."""

    n: int
    alpha: float
    values: np.ndarray

    def __call__(self, k, zeta):
        return self.values[k, zeta]

    def squared_norm(self, k):
        """E[Q_k(zeta)^2] under Binomial(n, alpha)."""
        return 1 / (comb(self.n, k) * (self.alpha / (1 - self.alpha)) ** k)


def krawtchouk_table(n: int, alpha) -> KrawtchoukTable:
    """Tabulate ``Q_k(zeta; n, alpha)`` by the three-term recurrence in ``k``.

    Raises
    ------
    AlphaDegenerate
        If ``alpha`` is 0 or 1.
    ValueError
        If ``n`` exceeds ``MAX_TABLE_N``; use :func:`krawtchouk` instead.
    """
    _check_alpha(alpha)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_TABLE_N:
        raise ValueError(f"n={n} > {MAX_TABLE_N}: evaluate single values with krawtchouk()")
    values = _recurrence(n, alpha, range(n + 1), n)
    values.setflags(write=False)
    return KrawtchoukTable(n, alpha, values)


def krawtchouk(k: int, zeta, n: int, alpha):
    """Single value ``Q_k(zeta; n, alpha)`` without building a table.

    Uses the duality ``Q_k(zeta) = Q_zeta(k)`` to run the recurrence over the
    smaller of the two integer arguments.
    """
    _check_alpha(alpha)
    if not (0 <= k <= n and 0 <= zeta <= n):
        raise ValueError("need 0 <= k, zeta <= n")
    if zeta < k:
        return _recurrence(n, alpha, [k], zeta)[zeta, 0]
    return _recurrence(n, alpha, [zeta], k)[k, 0]


def krawtchouk_exact(n: int, alpha) -> np.ndarray:
    """Rational table from the generating function by polynomial multiplication.

    Independent of the recurrence; intended as a reference for small ``n``.
    """
    alpha = to_fraction(alpha)
    _check_alpha(alpha)
    ratio = (1 - alpha) / alpha
    out = np.empty((n + 1, n + 1), dtype=object)
    for zeta in range(n + 1):
        poly = [Fraction(1)]
        for _ in range(zeta):
            poly = _polymul(poly, [Fraction(1), -ratio])
        for _ in range(n - zeta):
            poly = _polymul(poly, [Fraction(1), Fraction(1)])
        for k in range(n + 1):
            out[k, zeta] = poly[k] / comb(n, k)
    return out


def _polymul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def krawtchouk_symmetric_check(xi, k: int, alpha):
    """``C(n, k)^-1 e_k(1 - xi_1 / alpha, ..., 1 - xi_n / alpha)``.

    ``e_k`` is the ``k``-th elementary symmetric function.  The result equals
    ``Q_k(sum(xi); n, alpha)``.
    """
    xi = list(np.asarray(xi).reshape(-1).tolist())
    n = len(xi)
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= len(xi)")
    one = Fraction(1) if is_exact(alpha) else 1.0
    e = [one] + [0 * one] * k
    for v in xi:
        factor = one - v / alpha
        for j in range(k, 0, -1):
            e[j] = e[j] + factor * e[j - 1]
    return e[k] / comb(n, k)


def hermite_eval(k: int, w, sigma2=1.0):
    """``H_k(w; sigma2)`` via ``H_{j+1} = w H_j - j sigma2 H_{j-1}``.

    Vectorised over ``w``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    w = np.asarray(w, dtype=float)
    prev = np.ones_like(w)
    if k == 0:
        return prev
    cur = w.copy()
    for j in range(1, k):
        prev, cur = cur, w * cur - j * sigma2 * prev
    return cur


def hermite_table(jmax: int, w, sigma2=1.0) -> np.ndarray:
    """Rows ``H_0 .. H_jmax`` at the points ``w`` (shape ``(jmax + 1,) + w.shape``)."""
    w = np.asarray(w, dtype=float)
    out = np.empty((jmax + 1,) + w.shape)
    out[0] = 1.0
    if jmax >= 1:
        out[1] = w
    for j in range(1, jmax):
        out[j + 1] = w * out[j] - j * sigma2 * out[j - 1]
    return out
