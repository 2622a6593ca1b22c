from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpf

from afinv.arrangement import Arrangement, F_t_eval, chamber_signature, grad_P, hessian_P, linear_form
from afinv.inverse import (
    NewtonFailure,
    burgers_residual,
    fit_loglog,
    g_t_eval,
    geometric_grid,
    inverse_pair_residuals,
    newton_inverse,
    oracle_order,
    residual_order,
)
from afinv.trees import evaluate_layer_gradient, q_layer

SINGLE = Arrangement.from_data([(0, (1,), 1)])
THREE = Arrangement.from_data([(0, (1, 0), 1), (0, (0, 1), Fraction(1, 2)), (-1, (1, 1), Fraction(3, 4))])
Z3 = (Fraction(2), Fraction(3, 2))


def real(q):
    return mpf(q.numerator) / q.denominator


def test_g_t_at_zero_is_identity():
    r = g_t_eval(THREE, Z3, 0, 4)
    assert r.value == Z3 and r.residual == 0


def test_single_hyperplane_closed_form():
    r = g_t_eval(SINGLE, (mpf(2),), mpf("0.1"), 5)
    exact = (2 + mpmath.sqrt(mpf("4.4"))) / 2
    assert abs(r.value[0] - exact) < mpf(10) ** -7
    assert abs(r.residual - abs(F_t_eval(SINGLE, r.value, mpf("0.1"))[0] - 2)) < mpf(10) ** -45


def test_exact_evaluation_for_rational_input():
    r = g_t_eval(THREE, Z3, Fraction(1, 16), 3)
    assert all(isinstance(c, Fraction) for c in r.value)
    num = g_t_eval(THREE, tuple(map(real, Z3)), mpf(1) / 16, 3)
    assert all(abs(real(a) - b) < mpf(10) ** -45 for a, b in zip(r.value, num.value))


def test_newton_examples():
    assert newton_inverse(THREE, (2, 3), 0) == (2, 3)
    z = newton_inverse(SINGLE, (0,), 1, seed=(1,))
    assert abs(z[0] - 1) < mpf(10) ** -45
    z = newton_inverse(SINGLE, (0,), 1, seed=(-3,))
    assert abs(z[0] + 1) < mpf(10) ** -40


@settings(max_examples=15)
@given(
    st.fractions(min_value=-3, max_value=3, max_denominator=4),
    st.fractions(min_value=-3, max_value=3, max_denominator=4),
    st.fractions(min_value=Fraction(1, 20), max_value=1, max_denominator=20),
)
def test_newton_stays_in_seed_chamber(x, y, t):
    w = (x, y)
    if any(abs(linear_form(h, w)) < Fraction(1, 4) for h in THREE.hyperplanes):
        return
    try:
        z = newton_inverse(THREE, w, t)
    except NewtonFailure:
        return
    assert chamber_signature(THREE, z) == chamber_signature(THREE, w)
    back = F_t_eval(THREE, z, t)
    assert all(abs(a - real(b)) < mpf(10) ** -40 for a, b in zip(back, w))


def test_newton_rejects_wall_seed():
    with pytest.raises(ValueError):
        newton_inverse(THREE, (0, 1), Fraction(1, 2))


def test_fit_loglog_recovers_power():
    ts = [mpf(2) ** -k for k in range(3, 8)]
    fit = fit_loglog(ts, [3 * t**4 for t in ts])
    assert abs(fit.slope - 4) < mpf(10) ** -40
    with pytest.raises(ArithmeticError):
        fit_loglog(ts, [0] * len(ts))


@pytest.mark.parametrize("M", [0, 1, 3])
def test_residual_order_three_lines(M):
    assert abs(residual_order(THREE, Z3, M).slope - (M + 2)) <= mpf("0.2")


def test_residual_order_single_hyperplane():
    assert abs(residual_order(SINGLE, (Fraction(3, 2),), 3).slope - 5) <= mpf("0.1")
    assert abs(residual_order(SINGLE, (Fraction(3, 2),), 0).slope - 2) <= mpf("0.1")


@pytest.mark.slow
def test_residual_order_M5():
    assert abs(residual_order(THREE, Z3, 5).slope - 7) <= mpf("0.2")


@pytest.mark.parametrize("M", [1, 3])
def test_oracle_order(M):
    fit, worst = oracle_order(THREE, Z3, M)
    assert abs(fit.slope - (M + 2)) <= mpf("0.2")
    assert worst <= mpf(10) ** -40


@pytest.mark.parametrize("M", [1, 3])
def test_inverse_pair_identities(M):
    ts = geometric_grid(4, 9)
    first, second = zip(*(inverse_pair_residuals(THREE, Z3, t, M) for t in ts))
    assert abs(fit_loglog(ts, first).slope - (M + 1)) <= mpf("0.2")
    assert abs(fit_loglog(ts, second).slope - (M + 1)) <= mpf("0.2")


def test_burgers_small_t():
    assert burgers_residual(THREE, Z3, mpf("0.001"), 6) < mpf(10) ** -10


def test_burgers_residual_order():
    ts = [mpf(2) ** -k for k in range(5, 10)]
    res = [burgers_residual(THREE, Z3, t, 3) for t in ts]
    assert abs(fit_loglog(ts, res).slope - 3) <= mpf("0.3")


def test_burgers_closed_form():
    with mpmath.workdps(50):
        z, t = mpf(2), mpf("0.3")
        U = lambda s, x: (mpmath.sqrt(x * x + 4 * s) - x) / (2 * s)
        dU_dt = mpmath.diff(lambda s: U(s, z), t)
        dU_dz = mpmath.diff(lambda x: U(t, x), z)
        assert abs(dU_dt - dU_dz * U(t, z)) < mpf(10) ** -30


def test_burgers_base_case():
    # at t = 0 the Burgers right side is Hess P grad P, which must be grad Q^[1]
    g = grad_P(THREE, Z3)
    H = hessian_P(THREE, Z3)
    rhs = tuple(sum(H[i][j] * g[j] for j in range(2)) for i in range(2))
    assert evaluate_layer_gradient(q_layer(1), THREE, Z3) == rhs
    with mpmath.workdps(50):
        dt = mpf(10) ** -15
        assert burgers_residual(THREE, Z3, dt, 4, dt=dt / 100) < mpf(10) ** -12


@given(st.fractions(min_value=Fraction(1, 50), max_value=Fraction(1, 2), max_denominator=50))
def test_t_equals_weight_scaling(t):
    exact_t = g_t_eval(THREE, Z3, t, 4).value
    scaled = g_t_eval(THREE.scaled(t), Z3, 1, 4).value
    assert exact_t == scaled
    assert F_t_eval(THREE, Z3, t) == F_t_eval(THREE.scaled(t), Z3, 1)
