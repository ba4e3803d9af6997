from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qra.ring_tower import (
    CyclotomicNumber,
    LaurentPoly,
    MultiPoly,
    ParseError,
    PoleAtRoot,
    RationalFunction,
    bar_involution,
    cyclotomic_poly,
    parse_cyclotomic,
    parse_laurent,
    parse_multi,
    parse_rational,
    qbinom,
    qbinom_general,
    qfact,
    qint,
    specialize_at_root,
)

q = RationalFunction.q


def test_qint_values():
    assert qint(0) == LaurentPoly(0)
    assert qint(1) == LaurentPoly(1)
    assert qint(3) == parse_laurent("q^-2 + 1 + q^2")
    assert qint(-2) == -qint(2)


def test_qbinom_small_table():
    assert qbinom(4, 2) == parse_laurent("q^-4 + q^-2 + 2 + q^2 + q^4")
    assert qbinom(5, 0) == LaurentPoly(1) and qbinom(5, 5) == LaurentPoly(1)
    assert qbinom_general(3, 4) == LaurentPoly(0)
    with pytest.raises(ValueError):
        qbinom(3, 4)


def test_qbinom_general_negative_top():
    # [-n, r] = (-1)^r [n + r - 1, r]
    for n in range(1, 5):
        for r in range(4):
            assert qbinom_general(-n, r) == qbinom(n + r - 1, r) * (-1) ** r


def test_qfact_matches_product():
    assert qfact(4) == qint(1) * qint(2) * qint(3) * qint(4)


def test_cyclotomic_poly():
    assert cyclotomic_poly(3) == [1, 1, 1]
    assert cyclotomic_poly(5) == [1, 1, 1, 1, 1]


def test_eps_has_order_l():
    for l in (3, 5, 7):
        e = CyclotomicNumber.eps(l)
        assert e ** l == CyclotomicNumber(l, 1)
        assert all(e ** k != CyclotomicNumber(l, 1) for k in range(1, l))


def test_quantum_integer_vanishes_at_l():
    assert not specialize_at_root(qint(3), 3)
    assert specialize_at_root(qint(2), 3) == CyclotomicNumber.eps(3) + CyclotomicNumber.eps(3) ** -1


def test_pole_detection():
    f = RationalFunction(1) / RationalFunction(qint(3))
    assert f.has_pole_at(3) and not f.has_pole_at(5)
    with pytest.raises(PoleAtRoot):
        specialize_at_root(f, 3)
    # cancels: [6]/[3] has no pole at 3
    g = RationalFunction(qint(6)) / RationalFunction(qint(3))
    assert not g.has_pole_at(3)


def test_parse_round_trip_rational():
    f = parse_rational("(q^2 - 1)/(q + 3)")
    assert parse_rational(str(f)) == f


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_rational("q +")
    with pytest.raises(ParseError):
        parse_cyclotomic("zeta", 5)


def test_multipoly_evaluate():
    p = parse_multi("a1*q + a2^2")
    assert p.evaluate({"a1": 2, "a2": 3}) == q(1) * 2 + 9


small = st.integers(-3, 3)
laurents = st.dictionaries(st.integers(-4, 4), st.fractions(max_denominator=5).filter(bool), max_size=4)


@given(laurents, laurents, laurents)
def test_laurent_ring_axioms(a, b, c):
    a, b, c = LaurentPoly(a), LaurentPoly(b), LaurentPoly(c)
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)


@given(laurents, laurents)
def test_bar_is_ring_involution(a, b):
    a, b = RationalFunction(LaurentPoly(a)), RationalFunction(LaurentPoly(b))
    assert bar_involution(bar_involution(a)) == a
    assert bar_involution(a * b) == bar_involution(a) * bar_involution(b)


@given(laurents, laurents, st.sampled_from([3, 5, 7]))
def test_specialization_is_a_homomorphism(a, b, l):
    A, B = LaurentPoly(a), LaurentPoly(b)
    assert specialize_at_root(A * B, l) == specialize_at_root(A, l) * specialize_at_root(B, l)
    assert specialize_at_root(A + B, l) == specialize_at_root(A, l) + specialize_at_root(B, l)


@given(st.lists(st.fractions(max_denominator=4), min_size=1, max_size=4), st.sampled_from([3, 5]))
def test_cyclotomic_inverse(coeffs, l):
    x = sum((CyclotomicNumber.eps(l) ** i * c for i, c in enumerate(coeffs)), CyclotomicNumber(l, 0))
    if x:
        assert x * x.inverse() == CyclotomicNumber(l, 1)
        assert parse_cyclotomic(str(x), l) == x


@given(st.integers(0, 7), st.integers(0, 7))
def test_qbinom_pascal(n, r):
    if r == 0:
        return
    lhs = qbinom_general(n + 1, r)
    rhs = qbinom_general(n, r) * LaurentPoly.q(-r) + qbinom_general(n, r - 1) * LaurentPoly.q(n + 1 - r)
    assert lhs == rhs


@given(st.integers(1, 6), st.integers(0, 6))
def test_qbinom_bar_invariant(n, r):
    r = min(r, n)
    assert qbinom(n, r).bar() == qbinom(n, r)


def test_fraction_coercions():
    assert CyclotomicNumber(5, Fraction(1, 2)) * 2 == CyclotomicNumber(5, 1)
    assert MultiPoly(3) == MultiPoly(Fraction(6, 2))
