from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qra.drinfeld import (
    DrinfeldPolynomial,
    NotEigen,
    check_multiplicativity,
    extract_polynomial,
    highest_weight_vectors,
    poly_mul,
)
from qra.matrices import Matrix, Subspace
from qra.modules import (
    evaluation_twist,
    frobenius_factor,
    frobenius_pullback,
    make_Vn,
    module_from_descriptor,
    tensor,
)
from qra.ring_tower import CyclotomicNumber, RationalFunction, qbinom, qfact, specialize_at_root
from qra.ualg_words import xp

q = RationalFunction.q


def spec(m, a, l):
    return evaluation_twist(make_Vn(m, "specialized", l), a)


def test_V1_single_certificate_is_v0():
    V = spec(1, 2, 3)
    certs = highest_weight_vectors(V)
    assert len(certs) == 1
    assert certs[0].vector == [CyclotomicNumber(3, 1), CyclotomicNumber(3, 0)]
    assert certs[0].weight == 1


def test_eigenvalues_37():
    V = spec(3, 2, 5)
    (c,) = highest_weight_vectors(V)
    P = extract_polynomial(V, c)
    for r in range(4):
        assert P.plus[r] == specialize_at_root(qbinom(3, r), 5) * ((-2) ** r)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_generic_extraction_matches_product_formula(n):
    a = Fraction(3, 2)
    V = evaluation_twist(make_Vn(n), a)
    (c,) = highest_weight_vectors(V)
    P = extract_polynomial(V, c)
    want = [RationalFunction(1)]
    for m in range(1, n + 1):
        want = poly_mul(want, [RationalFunction(1), -q(n - 2 * m + 1) * a], RationalFunction(0))
    assert P.plus == want


@pytest.mark.parametrize("n,l", [(2, 5), (3, 5), (2, 3), (4, 7)])
def test_specialized_product_formula(n, l):
    a = CyclotomicNumber(l, 3)
    V = spec(n, a, l)
    P = extract_polynomial(V, highest_weight_vectors(V)[0])
    e = CyclotomicNumber.eps(l)
    want = [CyclotomicNumber(l, 1)]
    for s in range(1, n + 1):
        want = poly_mul(want, [CyclotomicNumber(l, 1), -(e ** (n + 1 - 2 * s)) * a], CyclotomicNumber(l, 0))
    assert P.plus == want
    # minus side uses a^-1
    want_m = [CyclotomicNumber(l, 1)]
    for s in range(1, n + 1):
        want_m = poly_mul(want_m, [CyclotomicNumber(l, 1), -(e ** (n + 1 - 2 * s)) / a], CyclotomicNumber(l, 0))
    assert P.minus == want_m


def test_reciprocity_rejects_tampering():
    V = spec(2, 2, 5)
    P = extract_polynomial(V, highest_weight_vectors(V)[0])
    assert P.reciprocity_holds()
    bad = DrinfeldPolynomial(P.plus, [P.minus[0], P.minus[1] + 1, P.minus[2]], P.weight, 5)
    assert not bad.reciprocity_holds()


def test_irreducible_tensor_has_one_certificate():
    V = tensor(spec(1, 1, 3), spec(1, 2, 3))
    assert len(highest_weight_vectors(V)) == 1


def test_wp_vector_in_kernel_generic():
    # V(m)_a (x) V(n)_b with b/a = q^(m+n-2p+2)
    for m, n, p in [(1, 1, 1), (2, 1, 1), (2, 2, 1), (2, 2, 2)]:
        a = Fraction(2)
        T = tensor(evaluation_twist(make_Vn(m), a), evaluation_twist(make_Vn(n), a * q(m + n - 2 * p + 2)))
        w = [RationalFunction(0)] * T.dim
        for r in range(p + 1):
            w[(p - r) * (n + 1) + r] = ((-1) ** r * q(r * (n - r + 1)) * RationalFunction(qfact(m - p + r))
                                        * RationalFunction(qfact(n - r)))
        certs = highest_weight_vectors(T)
        S = Subspace(T.ring, T.dim)
        for c in certs:
            S.add(c.vector)
        assert S.contains(w)
        assert all(not any(T.matrix(xp(s)).matvec(w)) for s in range(-2, 3))


def test_frobenius_polynomial():
    for F in (frobenius_pullback(1, 2, 3), frobenius_factor(1, 2, 3)):
        P = extract_polynomial(F, highest_weight_vectors(F)[0])
        assert P.plus == [CyclotomicNumber(3, x) for x in (1, 0, 0, -8)]


def test_not_eigen_on_bad_certificate():
    V = tensor(spec(1, 1, 3), spec(1, 2, 3))
    from qra.drinfeld import HighestWeightCertificate
    bogus = HighestWeightCertificate([V.ring.zero] * 3 + [V.ring.one], 2, 0)
    with pytest.raises(NotEigen):
        extract_polynomial(V, bogus)


def test_multiplicativity_examples():
    e = CyclotomicNumber.eps(5)
    assert check_multiplicativity(spec(1, 2, 5), spec(1, 3, 5))
    assert check_multiplicativity(spec(1, 2, 5), spec(0, 1, 5))
    assert check_multiplicativity(spec(1, 2, 3), frobenius_factor(1, 1, 3))
    assert check_multiplicativity(spec(2, e + 3, 5), spec(1, 2, 5))


@given(st.integers(1, 6), st.integers(1, 6), st.sampled_from([3, 5]), st.integers(0, 2))
def test_multiplicativity_property(a, b, l, m):
    assert check_multiplicativity(spec(1, a, l), spec(min(m, l - 1), b, l))


def test_reducible_module_lists_all_certificates():
    M = module_from_descriptor('{"l":3,"factors":[{"kind":"ev","m":1,"a":"1"},{"kind":"ev","m":1,"a":"eps^2"}]}')
    certs = highest_weight_vectors(M)
    assert sorted(c.weight for c in certs) == [0, 2]
    for c in certs:
        P = extract_polynomial(M, c)
        assert P.degree == c.weight
