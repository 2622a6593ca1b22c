"""Acceptance suite: each criterion is a function returning a :class:`Criterion`.

Shared by ``afinv verify`` and ``tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from . import trees
from .arrangement import Arrangement, chamber_signature, linear_form
from .dynamics import integrate_orbit, measure_period, orbit_start
from .inverse import g_t_eval, geometric_grid, layer_gradients, oracle_order, residual_order
from .oned import (
    METHODS,
    OneDSystem,
    action_quadrature,
    action_series,
    closed_form_g1_g2,
    critical_points,
    isochronicity_report,
    lagrange_coefficients,
)
from .scalar import working_digits

DIGITS = 50

# Model systems used across the suite
POLE_AT_ZERO = OneDSystem((0,), (1,))  # isochronous
POLE_AT_ONE = OneDSystem((1,), (1,))  # golden-ratio zeros, not isochronous
HARMONIC = OneDSystem()
SINGLE = Arrangement.from_data([(0, (1,), 1)])
THREE_LINES = Arrangement.from_data(
    [(0, (1, 0), 1), (0, (0, 1), Fraction(1, 2)), (-1, (1, 1), Fraction(3, 4))]
)
THREE_LINES_POINT = (Fraction(2), Fraction(3, 2))
ORTHOGONAL_PAIR = Arrangement.from_data([(Fraction(-1, 3), (1, 0), 1), (Fraction(1, 2), (0, 1), Fraction(5, 2))])

# Diagrams for Q^[1]..Q^[5] as edge lists on 0..m
REFERENCE_DIAGRAMS = {
    1: [([(0, 1)], Fraction(1, 2))],
    2: [([(0, 1), (1, 2)], Fraction(-1, 2))],
    3: [
        ([(0, 1), (1, 2), (1, 3)], Fraction(1, 3)),
        ([(0, 1), (1, 2), (2, 3)], Fraction(1, 2)),
    ],
    4: [
        ([(0, 1), (1, 2), (2, 3), (3, 4)], Fraction(-1, 2)),
        ([(0, 1), (1, 2), (2, 3), (1, 4)], Fraction(-1)),
        ([(0, 1), (1, 2), (1, 3), (1, 4)], Fraction(-1, 4)),
    ],
    5: [
        ([(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)], Fraction(1, 2)),
        ([(0, 1), (1, 2), (2, 3), (3, 4), (1, 5)], Fraction(1)),
        ([(0, 1), (1, 2), (2, 3), (3, 4), (2, 5)], Fraction(1)),
        ([(0, 1), (1, 2), (2, 3), (1, 4), (2, 5)], Fraction(1, 2)),
        ([(0, 1), (1, 2), (2, 3), (1, 4), (1, 5)], Fraction(1)),
        ([(0, 1), (1, 2), (1, 3), (1, 4), (1, 5)], Fraction(1, 5)),
    ],
}


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.detail}"


def _s(x, n=6) -> str:
    return mpmath.nstr(x, n)


def reference_layer(m: int) -> dict:
    out = {}
    for edges, c in REFERENCE_DIAGRAMS[m]:
        out[trees.canonical_code(m + 1, edges)] = c
    return out


def catalan_layer_value(m: int) -> Fraction:
    return Fraction((-1) ** (m + 1) * math.comb(2 * m, m), (m + 1) * 2 * m)


def check_tree_table() -> Criterion:
    trees._build_layer.cache_clear()
    start = time.perf_counter()
    bad = [m for m in range(1, 6) if trees.q_layer(m).coefficients() != reference_layer(m)]
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 1.0
    return Criterion(1, "tree-table reproduction m=1..5", ok, f"mismatched layers {bad}, {elapsed:.3f}s (< 1s)")


def closed_form_layer_value(m: int, digits: int = DIGITS) -> mpf:
    """``Q^[m](1)`` for the single hyperplane read off ``z = (w + sqrt(w^2 + 4t))/2`` numerically.

    ``U_t(w) = (G_t(w) - w)/t = 2/(sqrt(w^2+4t) + w)`` is expanded in t at
    ``w = 1``; ``Q^[m]`` is homogeneous of degree ``-2m`` in w, so
    ``Q^[m](1) = -[t^m] U_t(1) / (2m)``.
    """
    with working_digits(digits + 20):
        coeffs = mpmath.taylor(lambda t: 2 / (mpmath.sqrt(1 + 4 * t) + 1), 0, m)
        return -coeffs[m] / (2 * m)


def check_catalan() -> Criterion:
    start = time.perf_counter()
    worst = mpf(0)
    exact_bad = []
    with working_digits(DIGITS):
        for m in range(1, 9):
            layer = trees.q_layer(m)
            if layer.signed_sum() != catalan_layer_value(m):
                exact_bad.append(m)
            val = trees.evaluate_layer(layer, SINGLE, (Fraction(1),))
            if val != layer.signed_sum():
                exact_bad.append(m)
            ref = closed_form_layer_value(m)
            worst = max(worst, abs(mpf(val.numerator) / val.denominator - ref))
    elapsed = time.perf_counter() - start
    ok = not exact_bad and worst <= mpf(10) ** -30 and elapsed < 10
    return Criterion(
        2, "Catalan collapse m=1..8", ok, f"exact mismatches {exact_bad}, closed-form gap {_s(worst, 3)} (<= 1e-30), {elapsed:.2f}s"
    )


def random_chamber_points(arr: Arrangement, count: int, seed: int = 0, margin=Fraction(1, 10)) -> list:
    rng = random.Random(seed)
    pts = []
    while len(pts) < count:
        z = tuple(Fraction(rng.randint(-400, 400), 100) for _ in range(arr.n))
        if all(abs(linear_form(h, z)) > margin for h in arr.hyperplanes):
            pts.append(z)
    return pts


def check_q1_q2(seed: int = 0) -> Criterion:
    worst = mpf(0)
    variant_min_gap = mpf("inf")
    with working_digits(DIGITS):
        arr = THREE_LINES.real()
        for z in random_chamber_points(THREE_LINES, 10, seed):
            zr = tuple(mpf(c.numerator) / c.denominator for c in z)
            l1 = trees.evaluate_layer(trees.q_layer(1), arr, zr)
            l2 = trees.evaluate_layer(trees.q_layer(2), arr, zr)
            d1 = trees.q1_direct(arr, zr)
            d2 = trees.q2_direct(arr, zr)
            p2 = trees.q2_direct(arr, zr, repeated_k=True)
            worst = max(worst, abs(l1 - d1) / abs(d1), abs(l2 - d2) / abs(d2))
            variant_min_gap = min(variant_min_gap, abs(l2 - p2) / abs(l2))
    ok = worst <= mpf(10) ** -30 and variant_min_gap > mpf(10) ** -6
    return Criterion(
        3,
        "Q^[1]/Q^[2] direct formulas",
        ok,
        f"max rel gap {_s(worst, 3)} (<= 1e-30); f_k f_h^2 f_k variant off by >= {_s(variant_min_gap, 3)}",
    )


def check_composition_order() -> Criterion:
    parts, ok, slow = [], True, 0.0
    for M in (0, 1, 3, 5):
        start = time.perf_counter()
        fit = residual_order(THREE_LINES, THREE_LINES_POINT, M, geometric_grid(4, 10), DIGITS)
        elapsed = time.perf_counter() - start
        good = abs(fit.slope - (M + 2)) <= mpf("0.2")
        if M == 5:
            slow = elapsed
            good = good and elapsed < 60
        ok = ok and good
        parts.append(f"M={M}: {_s(fit.slope, 4)}")
    return Criterion(4, "composition residual order M+2", ok, ", ".join(parts) + f" (M=5 in {slow:.2f}s)")


def check_oracle_agreement() -> Criterion:
    parts, ok, worst = [], True, mpf(0)
    for M in (0, 1, 3, 5):
        fit, newton_res = oracle_order(THREE_LINES, THREE_LINES_POINT, M, geometric_grid(4, 10), DIGITS)
        ok = ok and abs(fit.slope - (M + 2)) <= mpf("0.2")
        worst = max(worst, newton_res)
        parts.append(f"M={M}: {_s(fit.slope, 4)}")
    ok = ok and worst <= mpf(10) ** -40
    return Criterion(5, "series vs Newton oracle order", ok, ", ".join(parts) + f"; Newton residual {_s(worst, 3)}")


def check_lagrange_triple() -> Criterion:
    tight = mpf(10) ** -40
    loose = mpf(10) ** -8
    worst_fast, worst_rt, worst_closed = mpf(0), mpf(0), mpf(0)
    for sys in (POLE_AT_ZERO, POLE_AT_ONE):
        cps = critical_points(sys, DIGITS)
        for k in range(len(cps)):
            g = {m: lagrange_coefficients(sys, k, 10, m, DIGITS, cps).values for m in METHODS}
            g1, g2 = closed_form_g1_g2(sys, k, DIGITS, cps)
            with working_digits(DIGITS):
                for a, b, c in zip(g["reversion"], g["derivative_formula"], g["root_tracking"]):
                    scale = max(1, abs(a))
                    worst_fast = max(worst_fast, abs(a - b) / scale)
                    worst_rt = max(worst_rt, abs(a - c) / scale)
                worst_closed = max(
                    worst_closed,
                    abs(g1 - g["reversion"][0]) / max(1, abs(g1)),
                    abs(g2 - g["reversion"][1]) / max(1, abs(g2)),
                )
    ok = worst_fast <= tight and worst_rt <= loose and worst_closed <= tight
    return Criterion(
        6,
        "Lagrange coefficients three ways",
        ok,
        f"reversion/derivative {_s(worst_fast, 3)}, root tracking {_s(worst_rt, 3)}, closed g1,g2 {_s(worst_closed, 3)}",
    )


def check_isochronicity() -> Criterion:
    with working_digits(DIGITS):
        iso = isochronicity_report(POLE_AT_ZERO, 1, 6, mpf(10) ** -30, DIGITS)
        a1_gap = abs(iso.coeffs[0] - mpmath.pi)
        high = max(abs(a) for a in iso.coeffs[1:])
        non = isochronicity_report(POLE_AT_ONE, 1, 6, mpf(10) ** -30, DIGITS)
        target = 3 * mpmath.pi / (25 * mpmath.sqrt(5))
        a2_gap = abs(non.coeffs[1] - target)
        ok = (
            iso.isochronous
            and a1_gap <= mpf(10) ** -30
            and high < mpf(10) ** -30
            and not non.isochronous
            and a2_gap <= mpf(10) ** -12
        )
        return Criterion(
            7,
            "isochronicity dichotomy",
            ok,
            f"pole 0: |A1-pi|={_s(a1_gap, 3)}, max|A2..A6|={_s(high, 3)}; pole 1: A2={_s(non.coeffs[1], 10)}, gap {_s(a2_gap, 3)}",
        )


def check_quadrature() -> Criterion:
    parts, ok = [], True
    cps = critical_points(POLE_AT_ONE, DIGITS)
    for P in (2, 3):
        series = action_series(POLE_AT_ONE, 1, P, DIGITS, cps)
        with working_digits(DIGITS):
            cs = (mpf(10) ** -3, mpf(10) ** -2)
            errs = [abs(action_quadrature(POLE_AT_ONE, 1, c, DIGITS, critical=cps) - series(c)) for c in cs]
            expo = mpmath.log(errs[1] / errs[0]) / mpmath.log(cs[1] / cs[0])
        ok = ok and abs(expo - (P + 1)) <= mpf("0.3")
        parts.append(f"P_max={P}: exponent {_s(expo, 4)} (target {P + 1})")
    return Criterion(8, "action quadrature cross-check", ok, ", ".join(parts))


def check_dynamics() -> Criterion:
    traj = integrate_orbit(POLE_AT_ZERO, 1.2, 0.0, 1e-3, 100_000)
    drift = traj.relative_energy_drift()
    periods = [measure_period(traj)]
    x0, y0 = orbit_start(POLE_AT_ZERO, 1, 1)
    periods.append(measure_period(integrate_orbit(POLE_AT_ZERO, x0, y0, 1e-3, 100_000)))
    x0, y0 = orbit_start(HARMONIC, 0, Fraction(1, 2))
    harmonic = measure_period(integrate_orbit(HARMONIC, x0, y0, 1e-3, 100_000))
    ok = (
        drift < 1e-5
        and all(abs(T - math.pi) <= 0.01 * math.pi for T in periods)
        and abs(harmonic - 2 * math.pi) <= 0.005 * 2 * math.pi
    )
    return Criterion(
        9,
        "leapfrog dynamics",
        ok,
        f"energy drift {drift:.2e}, periods {periods[0]:.6f} / {periods[1]:.6f} (pi), harmonic {harmonic:.6f} (2pi)",
    )


def _one_d_factor(h, axis: int) -> Arrangement:
    return Arrangement.from_data([(h.u0, (h.u[axis],), h.lam)])


def check_decoupling(M: int = 5) -> Criterion:
    arr = ORTHOGONAL_PAIR
    z = (Fraction(2), Fraction(-3, 4))
    t = Fraction(1, 20)
    singles = [_one_d_factor(arr.hyperplanes[0], 0), _one_d_factor(arr.hyperplanes[1], 1)]
    exact_ok = True
    for m in range(M + 1):
        layer = trees.q_layer(m)
        two = trees.evaluate_layer_gradient(layer, arr, z)
        one = tuple(trees.evaluate_layer_gradient(layer, s, (z[i],))[0] for i, s in enumerate(singles))
        exact_ok = exact_ok and two == one
        if m:
            v2 = trees.evaluate_layer(layer, arr, z)
            v1 = sum(trees.evaluate_layer(layer, s, (z[i],)) for i, s in enumerate(singles))
            exact_ok = exact_ok and v2 == v1
    exact_two = g_t_eval(arr, z, t, M).value
    exact_one = tuple(g_t_eval(s, (z[i],), t, M).value[0] for i, s in enumerate(singles))
    exact_ok = exact_ok and exact_two == exact_one
    with working_digits(DIGITS):
        zr = tuple(mpf(c.numerator) / c.denominator for c in z)
        tr = mpf(t.numerator) / t.denominator
        num_two = g_t_eval(arr.real(), zr, tr, M).value
        num_one = [g_t_eval(s.real(), (zr[i],), tr, M).value[0] for i, s in enumerate(singles)]
        gap = max(abs(a - b) for a, b in zip(num_two, num_one))
    ok = exact_ok and gap <= mpf(10) ** -30
    return Criterion(10, "orthogonal decoupling", ok, f"exact layer/inverse equality {exact_ok}, numeric gap {_s(gap, 3)}")


SUITES = {
    "trees": (check_tree_table, check_catalan, check_q1_q2),
    "invert": (check_composition_order, check_oracle_agreement, check_decoupling),
    "oned": (check_lagrange_triple, check_isochronicity, check_quadrature),
    "dynamics": (check_dynamics,),
}


def run_suite(name: str = "all", seed: int = 0) -> list[Criterion]:
    if name == "all":
        checks = [c for suite in ("trees", "invert", "oned", "dynamics") for c in SUITES[suite]]
    else:
        checks = list(SUITES[name])
    out = []
    for check in checks:
        out.append(check(seed) if check is check_q1_q2 else check())
    return sorted(out, key=lambda c: c.number)
