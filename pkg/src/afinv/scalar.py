"""Scalars, dense polynomials and truncated power series.

Two scalar kinds are used throughout the package:

* exact rationals, represented by :class:`fractions.Fraction`;
* reals at a configurable working precision of ``D`` decimal digits,
  represented by :class:`mpmath.mpf`.  The precision is a context setting;
  use :func:`working_digits` to run a block at a given ``D``.

Polynomials and series are generic over the coefficient type: anything that
supports ``+``, ``-``, ``*`` and ``/`` works, so the same code runs exactly on
Fractions and numerically on mpf values.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterator, Sequence

import mpmath
from mpmath import mp, mpf

DEFAULT_DIGITS = 50

__all__ = [
    "DEFAULT_DIGITS",
    "BracketError",
    "Polynomial",
    "TruncatedSeries",
    "isolate_monotone_root",
    "parse_rational",
    "poly_eval",
    "series_compose",
    "series_reverse",
    "to_real",
    "working_digits",
]


class BracketError(ArithmeticError):
    """No sign change could be found for a monotone root search."""

    def __init__(self, message: str, bracket: tuple):
        super().__init__(f"{message}; final bracket {bracket}")
        self.bracket = bracket


@contextlib.contextmanager
def working_digits(digits: int | None) -> Iterator[int]:
    """Run a block at ``digits`` decimal digits (``None`` keeps the current one)."""
    if digits is None:
        yield mp.dps
        return
    with mp.workdps(digits):
        yield digits


def parse_rational(value) -> Fraction:
    """Exact conversion of ints, Fractions, floats and strings like ``"3/2"``, ``"0.1"``.

    Floats convert to their exact binary value; pass strings for exact decimals.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        if not mpmath.isfinite(value):
            raise ValueError(f"non-finite number {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"cannot read {value!r} as a rational number")


def to_real(value) -> mpf:
    """Convert any supported scalar to an mpf at the current working precision."""
    if isinstance(value, mpf):
        return +value
    if isinstance(value, Fraction):
        return mpf(value.numerator) / value.denominator
    if isinstance(value, str):
        return to_real(parse_rational(value))
    return mpf(value)


def _is_zero(c) -> bool:
    return c == 0


# ---------------------------------------------------------------------------
# Polynomials


@dataclass(frozen=True)
class Polynomial:
    """Dense univariate polynomial, coefficients lowest degree first."""

    coeffs: tuple = ()

    def __post_init__(self):
        cs = list(self.coeffs)
        while cs and _is_zero(cs[-1]):
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_roots(cls, roots: Sequence, one=1) -> "Polynomial":
        p = cls((one,))
        for r in roots:
            p = p * cls((-r, one))
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial(tuple(c * other for c in self.coeffs))
        if self.is_zero() or other.is_zero():
            return Polynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(tuple(out))

    __rmul__ = __mul__

    def __call__(self, x):
        return poly_eval(self, x)

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i))

    def shift(self, center) -> "Polynomial":
        """Coefficients of ``p(center + xi)`` in ``xi`` (repeated synthetic division)."""
        cs = list(self.coeffs)
        n = len(cs)
        for i in range(n):
            for j in range(n - 2, i - 1, -1):
                cs[j] = cs[j] + center * cs[j + 1]
        return Polynomial(tuple(cs))

    def map(self, fn: Callable) -> "Polynomial":
        return Polynomial(tuple(fn(c) for c in self.coeffs))


def poly_eval(p: Polynomial, x):
    """Horner evaluation; the zero polynomial evaluates to 0."""
    acc = 0
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# Truncated power series


@dataclass(frozen=True)
class TruncatedSeries:
    """``sum_i coeffs[i] * (x - center)**i`` known up to ``order = len(coeffs) - 1``."""

    coeffs: tuple
    center: object = 0

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a truncated series needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def variable(cls, order: int, one=1, center=0) -> "TruncatedSeries":
        return cls((0 * one, one) + (0 * one,) * (order - 1), center)

    def __getitem__(self, i):
        return self.coeffs[i]

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError(f"cannot extend a series of order {self.order} to {order}")
        return TruncatedSeries(self.coeffs[: order + 1], self.center)

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries((self.coeffs[0] + other,) + self.coeffs[1:], self.center)
        n = min(self.order, other.order) + 1
        return TruncatedSeries(
            tuple(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n])), self.center
        )

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(tuple(-c for c in self.coeffs), self.center)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(tuple(c * other for c in self.coeffs), self.center)
        n = min(self.order, other.order) + 1
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(n):
            acc = a[0] * b[k]
            for i in range(1, k + 1):
                acc += a[i] * b[k - i]
            out.append(acc)
        return TruncatedSeries(tuple(out), self.center)

    __rmul__ = __mul__

    def reciprocal(self) -> "TruncatedSeries":
        a = self.coeffs
        if _is_zero(a[0]):
            raise ZeroDivisionError("series with zero constant term has no reciprocal")
        out = [1 / a[0]]
        for k in range(1, len(a)):
            acc = a[1] * out[k - 1]
            for i in range(2, k + 1):
                acc += a[i] * out[k - i]
            out.append(-acc / a[0])
        return TruncatedSeries(tuple(out), self.center)

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(tuple(c / other for c in self.coeffs), self.center)
        return self * other.reciprocal()

    def __pow__(self, k: int) -> "TruncatedSeries":
        if k < 0:
            return self.reciprocal() ** (-k)
        one = self.coeffs[0] * 0 + 1
        result = TruncatedSeries((one,) + (0 * one,) * self.order, self.center)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, x):
        """Evaluate the partial sum at ``x`` (absolute, not offset from center)."""
        d = x - self.center
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * d + c
        return acc

    @classmethod
    def from_polynomial(cls, p: Polynomial, center, order: int) -> "TruncatedSeries":
        cs = list(p.shift(center).coeffs[: order + 1])
        zero = center * 0
        cs += [zero] * (order + 1 - len(cs))
        return cls(tuple(cs), center)


def series_compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """``outer(inner(x))`` truncated at the smaller order; ``inner`` must vanish at its center."""
    if not _is_zero(inner.coeffs[0]):
        raise ValueError("inner series must have zero constant term")
    order = min(outer.order, inner.order)
    inner = inner.truncate(order)
    zero = inner.coeffs[0] * 0
    acc = TruncatedSeries((zero,) * (order + 1), inner.center)
    for c in reversed(outer.coeffs[: order + 1]):
        acc = acc * inner + c
    return acc


def series_reverse(s: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse of a series with ``c0 = 0, c1 != 0``.

    The coefficients ``d_n`` are solved one at a time from
    ``[xi^n] sum_k d_k s^k = 0`` for ``n >= 2``.  The result is a series in
    the image variable centered at 0.
    """
    c = s.coeffs
    if not _is_zero(c[0]):
        raise ValueError("reversion needs a zero constant term")
    if s.order < 1 or _is_zero(c[1]):
        raise ValueError("reversion needs a nonzero linear coefficient (degenerate critical point)")
    M = s.order
    base = TruncatedSeries(c, 0)
    powers = [None, base]
    for k in range(2, M + 1):
        powers.append(powers[-1] * base)
    zero = c[1] * 0
    d = [zero, 1 / c[1]]
    for n in range(2, M + 1):
        acc = zero
        for k in range(1, n):
            acc += d[k] * powers[k].coeffs[n]
        d.append(-acc / powers[n].coeffs[n])
    return TruncatedSeries(tuple(d), 0)


# ---------------------------------------------------------------------------
# Root isolation

_MAX_DOUBLINGS = 64


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _grow_bracket(g, anchor, direction: int, opposite_sign: int):
    offset = mpf(1)
    for _ in range(_MAX_DOUBLINGS):
        x = anchor + direction * offset
        if _sign(g(x)) == opposite_sign or g(x) == 0:
            return x
        offset *= 2
    raise BracketError("no sign change after bracket growth cap", (anchor, anchor + direction * offset))


def isolate_monotone_root(g: Callable, lo, hi, digits: int = DEFAULT_DIGITS):
    """Root of a strictly monotone ``g`` on the open interval ``(lo, hi)``.

    Endpoints may be infinite (``mpmath.inf``) or singular; ``g`` is only
    ever evaluated strictly inside.  Infinite ends are bracketed from the
    finite end (or 0) at offsets 1, 2, 4, ... up to 64 doublings; finite
    singular ends are approached by halving the distance to them.
    """
    lo, hi = to_real(lo), to_real(hi)
    if not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    with working_digits(max(mp.dps, digits + 10)):
        # Interior probe points of opposite sign.
        if mpmath.isinf(lo) and mpmath.isinf(hi):
            mid = mpf(0)
        elif mpmath.isinf(lo):
            mid = hi - 1
        elif mpmath.isinf(hi):
            mid = lo + 1
        else:
            mid = (lo + hi) / 2
        s_mid = _sign(g(mid))
        if s_mid == 0:
            return mid

        def probe(end, direction):
            if mpmath.isinf(end):
                return _grow_bracket(g, mid, direction, -s_mid)
            gap = abs(end - mid)
            for j in range(1, _MAX_DOUBLINGS + 1):
                x = end - direction * gap * mpf(2) ** (-j)
                if _sign(g(x)) != s_mid:
                    return x
            raise BracketError("no sign change approaching the interval end", (lo, hi))

        # g is monotone, so only one side can hold the opposite sign.
        candidates = []
        for end, direction in ((hi, 1), (lo, -1)):
            try:
                candidates.append((probe(end, direction), direction))
                break
            except BracketError:
                continue
        if not candidates:
            raise BracketError("no sign change in the interval", (lo, hi))
        x, direction = candidates[0]
        a, b = (mid, x) if direction > 0 else (x, mid)
        sa = _sign(g(a))
        if sa == 0:
            return a
        if _sign(g(b)) == 0:
            return b
        tol = mpf(10) ** (-digits)
        while True:
            m = (a + b) / 2
            if m == a or m == b or (b - a) <= tol * max(1, abs(m)):
                return m
            sm = _sign(g(m))
            if sm == 0:
                return m
            if sm == sa:
                a = m
            else:
                b = m
