"""Truncated inverse ``G_t = z + t grad Q_t`` of ``F_t = z - t grad P`` and its checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import mpf

from .arrangement import (
    Arrangement,
    F_t_eval,
    chamber_signature,
    coerce,
    grad_P,
    jacobian_F_t,
    norm,
)
from .scalar import DEFAULT_DIGITS, to_real, working_digits
from .trees import ORDER_CAP, evaluate_layer_gradient, evaluate_layer_hessian, q_layer


class NewtonFailure(ArithmeticError):
    pass


@dataclass(frozen=True)
class InverseSeriesResult:
    point: tuple
    t: object
    order: int
    value: tuple
    residual: mpf
    layer_gradients: tuple  # grad Q^[m](point), m = 0..order


def layer_gradients(arr: Arrangement, z, M: int, cap: int = ORDER_CAP) -> tuple:
    return tuple(evaluate_layer_gradient(q_layer(m, cap), arr, z) for m in range(M + 1))


def _assemble(z, t, grads):
    out = list(z)
    tp = t
    for g in grads:
        for i, gi in enumerate(g):
            out[i] += tp * gi
        tp = tp * t
    return tuple(out)


def composition_residual(arr: Arrangement, z, t, value) -> mpf:
    """``|F_t(value) - z|``, recomputed from scratch."""
    back = F_t_eval(arr, value, t)
    return norm(tuple(b - zi for b, zi in zip(back, z)))


def g_t_eval(arr: Arrangement, z, t, M: int, digits: int | None = DEFAULT_DIGITS, grads=None) -> InverseSeriesResult:
    """``z + sum_{m<=M} t^(m+1) grad Q^[m](z)`` with its composition residual.

    Rational ``z`` and ``t`` on a rational arrangement give an exact value.
    Precomputed ``grads`` (from :func:`layer_gradients`) may be passed to
    evaluate many t at one point.
    """
    with working_digits(digits):
        arr_c, (z_c, t_c) = coerce(arr, tuple(z), t)
        if grads is None:
            grads = layer_gradients(arr_c, z_c, M)
        if t_c == 0:
            return InverseSeriesResult(z_c, t_c, M, z_c, mpf(0), tuple(grads))
        value = _assemble(z_c, t_c, grads[: M + 1])
        return InverseSeriesResult(z_c, t_c, M, value, composition_residual(arr_c, z_c, t_c, value), tuple(grads))


def grad_Q_t(arr: Arrangement, z, t, M: int, grads=None) -> tuple:
    """``sum_{m<=M} t^m grad Q^[m](z)``."""
    arr_c, (z_c, t_c) = coerce(arr, tuple(z), t)
    if grads is None:
        grads = layer_gradients(arr_c, z_c, M)
    out = [0] * arr.n
    tp = 1
    for g in grads[: M + 1]:
        for i, gi in enumerate(g):
            out[i] += tp * gi
        tp = tp * t_c
    return tuple(out)


def newton_inverse(
    arr: Arrangement,
    w,
    t,
    seed=None,
    digits: int = DEFAULT_DIGITS,
    tol=None,
    maxiter: int = 200,
    max_halvings: int = 40,
) -> tuple:
    """Solve ``F_t(z) = w`` in the chamber of ``seed`` (default ``w``) by guarded Newton.

    Steps are halved while the iterate leaves the seed's chamber or the
    residual grows.  Converged when ``|F_t(z) - w| <= tol`` (default
    ``10**(10-D)``).
    """
    with working_digits(digits):
        real = arr.real()
        w = tuple(to_real(c) for c in w)
        t = to_real(t)
        z = tuple(to_real(c) for c in (w if seed is None else seed))
        sig = chamber_signature(real, z)
        tol = mpf(10) ** (10 - digits) if tol is None else to_real(tol)

        def resid(p):
            return tuple(a - b for a, b in zip(F_t_eval(real, p, t), w))

        r = resid(z)
        rn = norm(r)
        polished = False
        for _ in range(maxiter):
            if rn <= tol:
                if polished or rn == 0:
                    return z
                # one extra quadratic step buys headroom below tol
                polished = True
            J = mpmath.matrix([list(row) for row in jacobian_F_t(real, z, t)])
            try:
                step = mpmath.lu_solve(J, mpmath.matrix(list(r)))
            except ZeroDivisionError as exc:
                raise NewtonFailure("Jacobian is numerically singular") from exc
            lam = mpf(1)
            for _ in range(max_halvings + 1):
                cand = tuple(zi - lam * si for zi, si in zip(z, step))
                try:
                    ok = chamber_signature(real, cand) == sig
                except ValueError:
                    ok = False
                if ok:
                    rc = resid(cand)
                    rcn = norm(rc)
                    if rcn < rn or rcn <= tol:
                        break
                lam /= 2
            else:
                if polished:
                    return z
                raise NewtonFailure(f"line search failed at residual {mpmath.nstr(rn, 5)}")
            if polished and rcn >= rn:
                return z
            z, r, rn = cand, rc, rcn
        if rn <= tol:
            return z
        raise NewtonFailure(f"no convergence in {maxiter} iterations (residual {mpmath.nstr(rn, 5)})")


@dataclass(frozen=True)
class SlopeFit:
    slope: mpf
    intercept: mpf
    ts: tuple
    values: tuple


def fit_loglog(ts: Sequence, values: Sequence) -> SlopeFit:
    """Least-squares slope of ``log value`` against ``log t``."""
    xs = [mpmath.log(to_real(t)) for t in ts]
    ys = []
    for v in values:
        if v <= 0:
            raise ArithmeticError("residual underflow at working precision; raise the digit count")
        ys.append(mpmath.log(v))
    n = len(xs)
    mx = mpmath.fsum(xs) / n
    my = mpmath.fsum(ys) / n
    sxx = mpmath.fsum((x - mx) ** 2 for x in xs)
    sxy = mpmath.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return SlopeFit(slope, my - slope * mx, tuple(ts), tuple(values))


def geometric_grid(k_lo: int = 4, k_hi: int = 10) -> tuple:
    return tuple(Fraction(1, 2**k) for k in range(k_lo, k_hi + 1))


def residual_order(arr: Arrangement, z, M: int, t_grid=None, digits: int = DEFAULT_DIGITS) -> SlopeFit:
    """Fitted exponent of ``|F_t(G_t(z)) - z|`` in t; a layer-M truncation gives M + 2."""
    t_grid = geometric_grid() if t_grid is None else tuple(t_grid)
    with working_digits(digits):
        arr_r = arr.real()
        z_r = tuple(to_real(c) for c in z)
        grads = layer_gradients(arr_r, z_r, M)
        res = [g_t_eval(arr_r, z_r, t, M, None, grads).residual for t in t_grid]
        return fit_loglog(t_grid, res)


def oracle_order(arr: Arrangement, z, M: int, t_grid=None, digits: int = DEFAULT_DIGITS) -> tuple[SlopeFit, mpf]:
    """Fitted exponent of ``|G_t(z) - Newton(z)|`` and the worst Newton residual."""
    t_grid = geometric_grid() if t_grid is None else tuple(t_grid)
    with working_digits(digits):
        arr_r = arr.real()
        z_r = tuple(to_real(c) for c in z)
        grads = layer_gradients(arr_r, z_r, M)
        gaps, worst = [], mpf(0)
        for t in t_grid:
            series = g_t_eval(arr_r, z_r, t, M, None, grads).value
            exact = newton_inverse(arr_r, z_r, t, seed=series, digits=digits)
            worst = max(worst, composition_residual(arr_r, z_r, to_real(t), exact))
            gaps.append(norm(tuple(a - b for a, b in zip(series, exact))))
        return fit_loglog(t_grid, gaps), worst


def inverse_pair_residuals(arr: Arrangement, z, t, M: int, digits: int = DEFAULT_DIGITS) -> tuple[mpf, mpf]:
    """``|grad Q_t(F_t z) - grad P(z)|`` and ``|grad P(G_t z) - grad Q_t(z)|``."""
    with working_digits(digits):
        arr_r = arr.real()
        z_r = tuple(to_real(c) for c in z)
        t_r = to_real(t)
        fz = F_t_eval(arr_r, z_r, t_r)
        first = norm(tuple(a - b for a, b in zip(grad_Q_t(arr_r, fz, t_r, M), grad_P(arr_r, z_r))))
        g = g_t_eval(arr_r, z_r, t_r, M, None).value
        second = norm(tuple(a - b for a, b in zip(grad_P(arr_r, g), grad_Q_t(arr_r, z_r, t_r, M))))
        return first, second


def burgers_residual(arr: Arrangement, z, t, M: int, dt=None, digits: int = DEFAULT_DIGITS) -> mpf:
    """``|dU/dt - J(U) U|`` for the truncated ``U_t = grad Q_t``.

    ``dU/dt`` is a central difference in t with step ``dt``; ``J(U)`` is the
    exact Hessian of the truncated ``Q_t``.  Expected size ``O(t^M) + O(dt^2)``.
    """
    with working_digits(digits):
        arr_r = arr.real()
        z_r = tuple(to_real(c) for c in z)
        t = to_real(t)
        dt = mpf(10) ** (-(digits // 3)) if dt is None else to_real(dt)
        grads = layer_gradients(arr_r, z_r, M)
        hess = [evaluate_layer_hessian(q_layer(m), arr_r, z_r) for m in range(M + 1)]
        n = arr.n

        def U(s):
            return grad_Q_t(arr_r, z_r, s, M, grads)

        up, um = U(t + dt), U(t - dt)
        dU = [(a - b) / (2 * dt) for a, b in zip(up, um)]
        u = U(t)
        J = [[mpf(0)] * n for _ in range(n)]
        tp = mpf(1)
        for Hm in hess:
            for i in range(n):
                for j in range(n):
                    J[i][j] += tp * Hm[i][j]
            tp *= t
        JU = [mpmath.fsum(J[i][j] * u[j] for j in range(n)) for i in range(n)]
        return norm(tuple(a - b for a, b in zip(dU, JU)))
