from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mpf

from afinv.scalar import (
    BracketError,
    Polynomial,
    TruncatedSeries,
    isolate_monotone_root,
    parse_rational,
    poly_eval,
    series_compose,
    series_reverse,
    to_real,
    working_digits,
)

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=20)


def test_poly_eval_examples():
    assert poly_eval(Polynomial((-1, 0, 1)), 2) == 3
    assert poly_eval(Polynomial(()), 7) == 0
    assert poly_eval(Polynomial((-1, 0, 1)), 1) == 0


def test_polynomial_arithmetic_and_shift():
    p = Polynomial.from_roots((1, -2))
    assert p.coeffs == (-2, 1, 1)
    assert (p * p).degree == 4
    assert (p - p).is_zero()
    shifted = p.shift(Fraction(1, 3))
    for x in (Fraction(0), Fraction(5, 7), Fraction(-3)):
        assert shifted(x) == p(x + Fraction(1, 3))
    assert p.derivative().coeffs == (1, 2)


def test_parse_rational():
    assert parse_rational("3/2") == Fraction(3, 2)
    assert parse_rational("0.1") == Fraction(1, 10)
    assert parse_rational(0.5) == Fraction(1, 2)
    with pytest.raises(TypeError):
        parse_rational(True)
    with pytest.raises(ValueError):
        parse_rational(float("nan"))


def test_working_digits_restores():
    before = mpmath.mp.dps
    with working_digits(80):
        assert mpmath.mp.dps == 80
    assert mpmath.mp.dps == before


def test_reverse_identity_and_rescale():
    x = TruncatedSeries.variable(5, Fraction(1))
    assert series_reverse(x).coeffs == x.coeffs
    two = TruncatedSeries((0, Fraction(2), 0, 0))
    assert series_reverse(two).coeffs == (0, Fraction(1, 2), 0, 0)


def test_reverse_catalan():
    s = TruncatedSeries((Fraction(0), Fraction(1), Fraction(-1), 0, 0))
    r = series_reverse(s)
    assert r.coeffs == (0, 1, 1, 2, 5)
    back = series_compose(r, s)
    assert back.coeffs == (0, 1, 0, 0, 0)


def test_compose_examples():
    s = TruncatedSeries((0, 1, 3, -2))
    assert series_compose(TruncatedSeries.variable(3), s).coeffs == s.coeffs
    sq = TruncatedSeries((0, 0, 1, 0, 0))
    inner = TruncatedSeries((0, 1, 1, 0, 0))
    assert series_compose(sq, inner).coeffs == (0, 0, 1, 2, 1)


def test_compose_rejects_constant_term():
    with pytest.raises(ValueError):
        series_compose(TruncatedSeries((0, 1)), TruncatedSeries((1, 1)))


def test_reverse_rejects_degenerate():
    with pytest.raises(ValueError):
        series_reverse(TruncatedSeries((1, 1, 0)))
    with pytest.raises(ValueError):
        series_reverse(TruncatedSeries((0, 0, 1)))


@given(c1=fractions.filter(lambda v: v != 0), rest=st.lists(fractions, min_size=1, max_size=6))
def test_reverse_is_two_sided_inverse(c1, rest):
    s = TruncatedSeries((Fraction(0), c1, *rest))
    r = series_reverse(s)
    ident = (0, 1) + (0,) * (s.order - 1)
    assert series_compose(r, s).coeffs == ident
    assert series_compose(s, r).coeffs == ident
    assert series_reverse(r).coeffs == s.coeffs


@given(a=st.lists(fractions, min_size=1, max_size=5), b=st.lists(fractions, min_size=1, max_size=5))
def test_series_product_matches_polynomial_product(a, b):
    n = min(len(a), len(b)) - 1
    prod = (TruncatedSeries(tuple(a)) * TruncatedSeries(tuple(b))).truncate(n)
    full = Polynomial(tuple(a)) * Polynomial(tuple(b))
    want = tuple(full.coeffs[i] if i < len(full.coeffs) else 0 for i in range(n + 1))
    assert prod.coeffs == want


def test_reciprocal_roundtrip():
    s = TruncatedSeries((Fraction(2), Fraction(-1), Fraction(3), Fraction(1, 2)))
    assert (s * s.reciprocal()).coeffs == (1, 0, 0, 0)


def test_isolate_roots():
    one = isolate_monotone_root(lambda x: x - 1 / x, 0, mpmath.inf)
    assert abs(one - 1) < mpf(10) ** -45
    zero = isolate_monotone_root(lambda x: x, -1, 1)
    assert abs(zero) < mpf(10) ** -45
    phi = isolate_monotone_root(lambda x: x - 1 / (x - 1), 1, mpmath.inf)
    assert abs(phi - (1 + mpmath.sqrt(5)) / 2) < mpf(10) ** -45


def test_isolate_unbounded_both_sides():
    r = isolate_monotone_root(lambda x: x - 1000, -mpmath.inf, mpmath.inf)
    assert abs(r - 1000) < mpf(10) ** -40


def test_isolate_reports_bracket():
    with pytest.raises(BracketError) as info:
        isolate_monotone_root(lambda x: x + 5, 0, 1)
    assert info.value.bracket


def test_to_real_fraction():
    assert to_real(Fraction(1, 3)) == mpf(1) / 3
