from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qra.matrices import Matrix
from qra.modules import (
    DescriptorError,
    FrobeniusModule,
    ModuleError,
    commuting_square_check,
    evaluation_twist,
    frobenius_factor,
    frobenius_pullback,
    lusztig_tensor,
    make_Vn,
    module_from_descriptor,
    relation_audit,
    tensor,
    tensor_all,
    weight_decomposition,
)
from qra.ring_tower import PARAM, CyclotomicNumber, MultiPoly, PoleAtRoot, RationalFunction, parse_rational
from qra.ualg_words import GenSymbol, UnsupportedSymbol, xm, xp

q = RationalFunction.q


def V(n, a):
    return evaluation_twist(make_Vn(n), a)


def test_relation_audit_clean_on_generic_tensors():
    assert relation_audit(V(2, Fraction(3, 2))) == []
    assert relation_audit(tensor(V(1, 2), V(1, 5))) == []


def test_relation_audit_clean_on_symbolic_tensor():
    W = tensor(evaluation_twist(make_Vn(1, "symbolic"), "a1"), evaluation_twist(make_Vn(1, "symbolic"), "a2"))
    assert W.ring is PARAM
    assert relation_audit(W) == []


def test_x_plus_on_V1():
    W = evaluation_twist(make_Vn(1, "symbolic"), "a")
    a = MultiPoly.gen("a")
    assert W.matrix(xp(2))[0, 1] == a ** 2
    assert W.matrix(xp(2))[1, 0] == 0


def test_P_values_on_V2():
    W = V(2, Fraction(3, 2))
    P1, P2 = W.matrix(GenSymbol("P", 1)), W.matrix(GenSymbol("P", 2))
    assert P1[0, 0] == (q(1) + q(-1)) * Fraction(-3, 2)
    assert P2[0, 0] == Fraction(9, 4)


def test_P_minus_one_on_V1():
    W = evaluation_twist(make_Vn(1, "symbolic"), "a")
    a = MultiPoly.gen("a")
    d = W.matrix(GenSymbol("P", -1)).diagonal()
    assert d[0] == -(a ** -1)
    assert d[1] == (a ** -1) * q(-2)


def test_specialized_rejects_large_n():
    with pytest.raises(ValueError):
        make_Vn(3, "specialized", 3)


def test_lift_restriction_checks_invariance():
    W = evaluation_twist(make_Vn(4), 1)
    from qra.modules import SpecializedModule
    S = SpecializedModule(W, 3, [0, 1, 2, 3])  # span(v_4) is not invariant: e+ v_4 = v_3
    with pytest.raises((ModuleError, PoleAtRoot)):
        S.matrix(xp(0))


def test_frobenius_direct_module():
    F = frobenius_pullback(1, 2, 3)
    assert isinstance(F, FrobeniusModule)
    assert F.classical.check()
    assert set(weight_decomposition(F)) == {3, -3}
    assert F.matrix(xp(0)).is_zero() and F.matrix(xm(4)).is_zero()
    assert not F.matrix(xp(0, 3)).is_zero()
    with pytest.raises(UnsupportedSymbol):
        F.matrix(GenSymbol("h", 1))


@pytest.mark.parametrize("b,n", [(1, 1), (2, 1), (2, 2)])
def test_commuting_square(b, n):
    assert commuting_square_check(b, n, 3)


@pytest.mark.parametrize("m,dim", [(2, 3), (3, 2), (4, 4), (5, 6)])
def test_lusztig_dimensions(m, dim):
    W = lusztig_tensor(m, 3)
    assert W.dim == dim
    wd = weight_decomposition(W)
    assert max(wd) == m
    assert all(len(wd[w]) == len(wd.get(-w, [])) for w in wd)


def test_lusztig_audit():
    assert relation_audit(lusztig_tensor(4, 3)) == []


def test_descriptor_round():
    M = module_from_descriptor('{"l":3,"factors":[{"kind":"ev","m":1,"a":"2"},{"kind":"frob","n":1,"b":"1"}]}')
    assert M.dim == 4


@pytest.mark.parametrize("bad", [
    "{",
    '{"factors": []}',
    '{"l": 4, "factors": [{"kind": "ev", "m": 1}]}',
    '{"l": 3, "factors": [{"kind": "ev", "m": 3}]}',
    '{"l": 3, "factors": [{"kind": "mystery"}]}',
    '{"l": 3, "factors": [{"kind": "ev", "m": 1, "a": "zeta"}]}',
])
def test_descriptor_errors(bad):
    with pytest.raises(DescriptorError):
        module_from_descriptor(bad)


def test_frobenius_factor_is_tensorable():
    W = tensor(evaluation_twist(make_Vn(1, "specialized", 3), 2), frobenius_factor(1, 1, 3))
    assert W.dim == 4
    assert relation_audit(W) == []


@given(st.integers(1, 9), st.integers(1, 9), st.sampled_from([3, 5]))
def test_tensor_weights_add(a, b, l):
    W = tensor(evaluation_twist(make_Vn(1, "specialized", l), a), evaluation_twist(make_Vn(2, "specialized", l), b))
    wd = weight_decomposition(W)
    assert sorted(len(v) for v in wd.values()) == [1, 1, 2, 2]
    assert sum(len(v) for v in wd.values()) == 6


@given(st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(bool),
       st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(bool))
def test_coproduct_is_coassociative(a, b):
    A, B, C = V(1, a), V(1, b), V(1, 3)
    L, R = tensor(tensor(A, B), C), tensor(A, tensor(B, C))
    for s in (xp(0), xm(0), GenSymbol("e0+"), GenSymbol("e0-")):
        assert L.matrix(s) == R.matrix(s)
