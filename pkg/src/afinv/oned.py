"""One degree of freedom: critical points, local inverses and action series.

The system is ``H = y**2/2 + f(x)**2/2`` with

    f(x) = x - sum_j lam_j / (x - a_j),      lam_j > 0,

which has exactly one zero ``b_k`` in each band ``(a_k, a_{k+1})``
(``a_0 = -inf``, ``a_{N+1} = +inf``).  Near ``b_k`` the equation ``w = f(x)``
has an analytic inverse ``x_k(w) = b_k + sum_i g_i w**i / i!``.  The energy-c
orbit encloses the area

    A(c) = sum_p A_p c**p,    A_p = 2 pi * 2p / (2**p (p!)**2) * g_{2p-1},

and motion around ``b_k`` is isochronous exactly when ``A_p = 0`` for ``p >= 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import mp, mpf

from .scalar import (
    DEFAULT_DIGITS,
    Polynomial,
    TruncatedSeries,
    isolate_monotone_root,
    parse_rational,
    series_reverse,
    to_real,
    working_digits,
)

METHODS = ("reversion", "derivative_formula", "root_tracking")


class NewtonDivergence(ArithmeticError):
    """Newton iteration for ``f(x) = w`` left the band or failed to converge."""


@dataclass(frozen=True)
class OneDSystem:
    poles: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        poles = tuple(parse_rational(a) if not isinstance(a, mpf) else a for a in self.poles)
        weights = tuple(parse_rational(l) if not isinstance(l, mpf) else l for l in self.weights)
        if len(poles) != len(weights):
            raise ValueError(f"{len(poles)} poles but {len(weights)} weights")
        for i in range(1, len(poles)):
            if not poles[i - 1] < poles[i]:
                raise ValueError(f"poles must be strictly increasing (poles[{i}])")
        for i, lam in enumerate(weights):
            if not lam > 0:
                raise ValueError(f"weights[{i}] must be positive, got {lam}")
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "weights", weights)

    @property
    def N(self) -> int:
        return len(self.poles)

    def band(self, k: int) -> tuple:
        if not 0 <= k <= self.N:
            raise IndexError(f"critical index {k} outside 0..{self.N}")
        lo = self.poles[k - 1] if k > 0 else -mpmath.inf
        hi = self.poles[k] if k < self.N else mpmath.inf
        return lo, hi

    def _params(self, x):
        if isinstance(x, mpf):
            return [(to_real(a), to_real(lam)) for a, lam in zip(self.poles, self.weights)]
        return zip(self.poles, self.weights)

    def f(self, x):
        acc = x
        for a, lam in self._params(x):
            acc = acc - lam / (x - a)
        return acc

    def df(self, x):
        acc = 1
        for a, lam in self._params(x):
            acc = acc + lam / (x - a) ** 2
        return acc


@dataclass(frozen=True)
class CriticalPoint:
    index: int
    location: mpf
    band: tuple
    slope: mpf


@dataclass(frozen=True)
class LagrangeCoefficients:
    """``values[i-1] = g_i(b_k)``; ``x_k(w) = b_k + sum g_i w**i / i!``."""

    index: int
    order: int
    values: tuple
    center: mpf
    method: str = "reversion"
    system: OneDSystem | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ActionSeries:
    """``A(c) = sum_p coeffs[p-1] * c**p`` with c the orbit energy."""

    index: int
    coeffs: tuple

    def __call__(self, c):
        return sum(a * c ** (p + 1) for p, a in enumerate(self.coeffs))

    def period(self, c):
        """``T(c) = dA/dc``."""
        return sum((p + 1) * a * c**p for p, a in enumerate(self.coeffs))


def build_f(sys: OneDSystem) -> tuple[Polynomial, Polynomial]:
    """``f = q/p`` with ``p = prod (x - a_j)`` and ``q = x p - sum lam_j prod_{i != j} (x - a_i)``.

    Coefficients stay exact when the system data are rational.
    """
    one = Fraction(1)
    p = Polynomial.from_roots(sys.poles, one)
    q = p * Polynomial((0, one))
    for j, lam in enumerate(sys.weights):
        others = Polynomial.from_roots([a for i, a in enumerate(sys.poles) if i != j], one)
        q = q - others * lam
    return q, p


def critical_points(sys: OneDSystem, digits: int = DEFAULT_DIGITS) -> list[CriticalPoint]:
    with working_digits(digits):
        poles = [to_real(a) for a in sys.poles]
        num = OneDSystem(tuple(poles), tuple(to_real(l) for l in sys.weights))
        out = []
        for k in range(sys.N + 1):
            lo, hi = num.band(k)
            b = isolate_monotone_root(num.f, lo, hi, digits)
            b = +b
            if not (lo < b < hi):
                raise RuntimeError(f"root for band {k} escaped its bracket")
            out.append(CriticalPoint(k, b, (lo, hi), to_real(num.df(b))))
        return out


def _real_system(sys: OneDSystem) -> OneDSystem:
    return OneDSystem(tuple(to_real(a) for a in sys.poles), tuple(to_real(l) for l in sys.weights))


def taylor_f(sys: OneDSystem, b, order: int) -> TruncatedSeries:
    """Taylor series of ``f`` at its zero ``b``: ``q(b+xi)/p(b+xi)`` by series division."""
    q, p = build_f(sys)
    q = q.map(to_real)
    p = p.map(to_real)
    qs = TruncatedSeries.from_polynomial(q, b, order)
    ps = TruncatedSeries.from_polynomial(p, b, order)
    s = qs / ps
    # b is a root to working precision; the reversion contract wants c0 = 0.
    return TruncatedSeries((mpf(0),) + s.coeffs[1:], b)


def _newton_f(num: OneDSystem, w, start, band, tol, maxiter=200):
    lo, hi = band
    x = start
    for _ in range(maxiter):
        step = (num.f(x) - w) / num.df(x)
        x_new = x - step
        halvings = 0
        while not (lo < x_new < hi):
            step /= 2
            x_new = x - step
            halvings += 1
            if halvings > 60:
                raise NewtonDivergence(f"Newton for f(x) = {w} cannot stay inside {band}")
        x = x_new
        if abs(step) <= tol * max(1, abs(x)):
            return x
    raise NewtonDivergence(f"Newton for f(x) = {w} did not converge from {start}")


def _root_band_scale(sys: OneDSystem, b) -> mpf:
    if not sys.poles:
        return mpf(1)
    return min(mpf(1), min(abs(b - to_real(a)) for a in sys.poles))


def _root_tracking(sys: OneDSystem, cp: CriticalPoint, M: int, digits: int) -> tuple:
    """Derivatives of ``x_k`` at 0 from Newton solves of ``f(x) = w`` on a grid.

    Interpolates ``x_k(j h) - b_k`` for ``j = -K..K`` by a polynomial and reads
    its coefficients; the precision is raised so that ``h**i`` does not eat
    the digits of the i-th coefficient.
    """
    h_digits = 3
    wp = digits + 30 + M * (h_digits + 1)
    with working_digits(wp):
        num = _real_system(sys)
        band = tuple(to_real(e) for e in cp.band)
        b = isolate_monotone_root(num.f, band[0], band[1], wp)
        h = mpf(10) ** (-h_digits) * _root_band_scale(sys, b)
        K = M + 6
        tol = mpf(10) ** (-(wp - 5))
        vals = {0: mpf(0)}
        for direction in (1, -1):
            x = b
            for j in range(1, K + 1):
                x = _newton_f(num, direction * j * h, x, band, tol)
                vals[direction * j] = x - b
        nodes = list(range(-K, K + 1))
        A = mpmath.matrix([[mpf(j) ** i for i in range(2 * K + 1)] for j in nodes])
        rhs = mpmath.matrix([vals[j] for j in nodes])
        coef = mpmath.lu_solve(A, rhs)
        out = tuple(math.factorial(i) * coef[i] / h**i for i in range(1, M + 1))
    with working_digits(digits):
        return tuple(+g for g in out)


def lagrange_coefficients(
    sys: OneDSystem,
    k: int,
    M: int,
    method: str = "reversion",
    digits: int = DEFAULT_DIGITS,
    critical: list[CriticalPoint] | None = None,
) -> LagrangeCoefficients:
    """Coefficients ``g_1..g_M`` of the local inverse at ``b_k``.

    ``reversion`` reverts the Taylor series of f; ``derivative_formula`` reads
    ``g_i = (i-1)! [xi^(i-1)] (xi/f(b+xi))**i``; ``root_tracking`` fits Newton
    solutions of ``f(x) = w`` on a small grid of w values.
    """
    if M < 1:
        raise ValueError(f"order must be >= 1, got {M}")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if not 0 <= k <= sys.N:
        raise IndexError(f"critical index {k} outside 0..{sys.N}")
    cps = critical if critical is not None else critical_points(sys, digits)
    cp = cps[k]
    with working_digits(digits):
        b = cp.location
        if method == "reversion":
            d = series_reverse(taylor_f(sys, b, M))
            values = tuple(math.factorial(i) * d[i] for i in range(1, M + 1))
        elif method == "derivative_formula":
            s = taylor_f(sys, b, M)
            phi = TruncatedSeries(s.coeffs[1:], 0).reciprocal()  # xi / f(b + xi), order M-1
            values = []
            power = phi
            for i in range(1, M + 1):
                values.append(math.factorial(i - 1) * power[i - 1])
                power = power * phi
            values = tuple(values)
        else:
            values = _root_tracking(sys, cp, M, digits)
    return LagrangeCoefficients(k, M, values, b, method, sys)


def closed_form_g1_g2(
    sys: OneDSystem, k: int, digits: int = DEFAULT_DIGITS, critical: list[CriticalPoint] | None = None
) -> tuple:
    """First two coefficients from the product formulas in the roots ``b_j`` and poles ``a_j``.

    In the two-term sum for ``g_2`` the first summand runs over the zeros
    ``b_l`` with ``l != k`` and the second over the poles ``a_l``; both ranges
    have N members and are paired in sorted order.
    """
    cps = critical if critical is not None else critical_points(sys, digits)
    with working_digits(digits):
        bs = [cp.location for cp in cps]
        a = [to_real(x) for x in sys.poles]
        bk = bs[k]
        others = [bj for j, bj in enumerate(bs) if j != k]
        num = mpmath.fprod(bk - aj for aj in a)
        den = mpmath.fprod(bk - bj for bj in others)
        g1 = num / den
        total = mpf(0)
        for l, (bl, al) in enumerate(zip(others, a)):
            a_rest = mpmath.fprod((bk - aj) ** 2 for j, aj in enumerate(a) if j != l)
            b_rest = mpmath.fprod((bk - bj) ** 2 for j, bj in enumerate(others) if j != l)
            # Summand on the zero b_l: (bk - a_l)^2 prod_{j != l} (bk - a_j)^2 / ((bk - b_l)^3 ...)
            total -= (bk - al) ** 2 * a_rest / ((bk - bl) ** 3 * b_rest)
            total += (bk - al) * a_rest / ((bk - bl) ** 2 * b_rest)
        return g1, 2 * total


@dataclass(frozen=True)
class InverseValue:
    value: mpf
    defect: mpf


def inverse_eval(coeffs: LagrangeCoefficients, w, digits: int | None = None) -> InverseValue:
    """Partial sum of the local inverse at ``w`` and its defect ``|f(x) - w|``."""
    with working_digits(digits):
        w = to_real(w)
        x = coeffs.center
        wi = mpf(1)
        for i, g in enumerate(coeffs.values, start=1):
            wi *= w
            x += g * wi / math.factorial(i)
        defect = mpf(0)
        if coeffs.system is not None:
            defect = abs(_real_system(coeffs.system).f(x) - w)
        return InverseValue(x, defect)


def action_coefficient(p: int, g):
    """Coefficient of ``c**p`` in the action from ``g_{2p-1}``."""
    return 2 * mpmath.pi * 2 * p / (2**p * math.factorial(p) ** 2) * g


def action_series(
    sys: OneDSystem, k: int, P_max: int, digits: int = DEFAULT_DIGITS, critical=None
) -> ActionSeries:
    if P_max < 1:
        raise ValueError("P_max must be >= 1")
    g = lagrange_coefficients(sys, k, 2 * P_max - 1, "reversion", digits, critical)
    with working_digits(digits):
        return ActionSeries(k, tuple(action_coefficient(p, g.values[2 * p - 2]) for p in range(1, P_max + 1)))


def action_quadrature(
    sys: OneDSystem,
    k: int,
    c,
    digits: int = DEFAULT_DIGITS,
    rtol=None,
    critical=None,
    max_nodes: int = 1 << 14,
) -> mpf:
    """Area ``\\oint x dy`` of the energy-c orbit around ``b_k`` by the periodic trapezoid rule.

    ``x`` is obtained pointwise by Newton on ``f(x) = sqrt(2c) cos(theta)``
    started at ``b_k``; no series is involved.  Nodes are doubled until two
    successive estimates agree to ``rtol`` (default ``10**(10-D)``).
    """
    cps = critical if critical is not None else critical_points(sys, digits)
    cp = cps[k]
    with working_digits(digits + 5):
        c = to_real(c)
        if not c > 0:
            raise ValueError("energy must be positive")
        rtol = mpf(10) ** (10 - digits) if rtol is None else to_real(rtol)
        num = _real_system(sys)
        band = cp.band
        r = mpmath.sqrt(2 * c)
        tol = mpf(10) ** (-(digits + 2))
        cache = {}

        def x_of(cos_t):
            key = cos_t
            if key not in cache:
                cache[key] = _newton_f(num, r * cos_t, cp.location, band, tol)
            return cache[key]

        def trapezoid(n):
            acc = mpf(0)
            for j in range(n):
                ct = mpmath.cospi(mpf(2 * j) / n)
                acc += x_of(ct) * r * ct
            return acc * 2 * mpmath.pi / n

        n = 16
        prev = trapezoid(n)
        while True:
            n *= 2
            cur = trapezoid(n)
            if abs(cur - prev) <= rtol * abs(cur):
                break
            if n >= max_nodes:
                raise ArithmeticError(f"trapezoid rule did not reach rtol {rtol} with {n} nodes")
            prev = cur
    with working_digits(digits):
        return +cur


@dataclass(frozen=True)
class IsochronicityReport:
    index: int
    isochronous: bool
    tol: mpf
    coeffs: tuple

    @property
    def verdict(self) -> str:
        P = len(self.coeffs)
        return f"isochronous to order {P}" if self.isochronous else "non-isochronous"

    @property
    def witness(self):
        """First ``(p, A_p)`` with ``|A_p| >= tol``, ``None`` when isochronous."""
        for p, a in enumerate(self.coeffs[1:], start=2):
            if abs(a) >= self.tol:
                return p, a
        return None


def isochronicity_report(
    sys: OneDSystem, k: int, P_max: int, tol=None, digits: int = DEFAULT_DIGITS, critical=None
) -> IsochronicityReport:
    series = action_series(sys, k, P_max, digits, critical)
    with working_digits(digits):
        tol = mpf(10) ** (20 - digits) if tol is None else to_real(tol)
        iso = all(abs(a) < tol for a in series.coeffs[1:])
        return IsochronicityReport(k, iso, tol, series.coeffs)
