import itertools

import pytest
from hypothesis import given, strategies as st

from qra.ring_tower import CyclotomicNumber
from qra.segments import (
    EpsilonSegment,
    EpsScalar,
    OrbitDetected,
    PolyOverEps,
    ReprParams,
    canonical_params,
    construction_plan,
    decompose_into_segments,
    factor_P0_P1,
    general_position,
    isomorphic,
    parse_poly,
    parse_scalar,
    predict_irreducible,
)


def eps(l, k=1):
    return EpsScalar(CyclotomicNumber.eps(l) ** k)


def num(l, x):
    return EpsScalar(CyclotomicNumber(l, x))


def test_segment_elements_distinct():
    for l in (3, 5, 7):
        for m in range(1, l):
            els = EpsilonSegment(m, num(l, 2)).elements()
            assert len(set(els)) == m


def test_general_position_examples():
    a = parse_scalar("a", 5)
    assert not general_position(EpsilonSegment(1, a), EpsilonSegment(1, a * eps(5, 2)))
    assert general_position(EpsilonSegment(1, a), EpsilonSegment(1, a))
    # at l=5 only b/a = 1 avoids eps^{+-1}, eps^{+-3}
    assert general_position(EpsilonSegment(2, a), EpsilonSegment(1, a))
    # b/a = eps^{+-1}: S_1(b) lies inside S_2(a), so the union is not longer
    for k in (1, 4):
        assert general_position(EpsilonSegment(2, a), EpsilonSegment(1, a * eps(5, k)))
    # b/a = eps^{+-3} = eps^{-+2}: the union is S_3
    for k in (2, 3):
        assert not general_position(EpsilonSegment(2, a), EpsilonSegment(1, a * eps(5, k)))


def test_unrelated_parameters_are_general():
    a, b = parse_scalar("a", 5), parse_scalar("b", 5)
    assert general_position(EpsilonSegment(2, a), EpsilonSegment(3, b))
    assert general_position(EpsilonSegment(1, num(5, 2)), EpsilonSegment(1, num(5, 3)))


def test_decompose_examples():
    assert [s.to_json() for s in decompose_into_segments(parse_poly("(1-eps*u)(1-eps^-1*u)", 5))] == [[2, "1"]]
    assert [s.to_json() for s in decompose_into_segments(parse_poly("1-a*u", 5))] == [[1, "a"]]
    assert [s.to_json() for s in decompose_into_segments(parse_poly("(1-u)(1-eps^2*u)", 5))] == [[2, "eps"]]


def test_decompose_refuses_orbits():
    with pytest.raises(OrbitDetected):
        decompose_into_segments(parse_poly("1-u^3", 3))
    with pytest.raises(OrbitDetected):
        decompose_into_segments(parse_poly("(1-u)(1-eps*u)(1-eps^2*u)", 3))


def test_overlapping_segments_keep_multiplicity():
    # {e, e, e^3, e^4}: S_3(e^3) and S_1(e) overlap, both must survive
    l = 5
    P = PolyOverEps(l, [(eps(l, 1), 2), (eps(l, 3), 1), (eps(l, 4), 1)])
    segs = decompose_into_segments(P)
    assert sorted(s.m for s in segs) == [1, 3]
    assert canonical_params(P).to_poly() == P


def test_factor_examples():
    P0, P1 = factor_P0_P1(parse_poly("1-u^3", 3))
    assert str(P0) == "1" and str(P1) == "1 - u^3"
    P0, P1 = factor_P0_P1(parse_poly("(1-2u)(1-u^3)", 3))
    assert str(P0) == "1 - 2*u" and str(P1) == "1 - u^3"
    P = parse_poly("(1-u)(1-eps*u)", 3)
    P0, P1 = factor_P0_P1(P)
    assert P0 == P and str(P1) == "1"


def test_factor_detects_orbit_given_by_roots():
    P = parse_poly('{"roots":[{"val":"2"},{"val":"2*eps"},{"val":"2*eps^2"},{"val":"5"}]}', 3)
    P0, P1 = factor_P0_P1(P)
    assert str(P0) == "1 - 5*u"
    assert str(P1) == "1 - 8*u^3"


def test_canonical_params_examples():
    assert canonical_params(parse_poly("1-u^3", 3)).to_json() == {"segments": [], "frobenius": [[1, "1"]]}
    assert canonical_params(parse_poly("1-2u", 3)).to_json() == {"segments": [[1, "2"]], "frobenius": []}
    mixed = canonical_params(parse_poly("(1-eps*u)(1-eps^-1*u)(1-4u^3)^2", 3))
    assert mixed.to_json() == {"segments": [[2, "1"]], "frobenius": [[2, "4"]]}


def test_isomorphic_examples():
    p = canonical_params(parse_poly("1-2u", 3))
    assert isomorphic(p, p)
    b, be = num(3, 2), num(3, 2) * eps(3)
    f1 = ReprParams(3, [], [(1, b ** 3)])
    f2 = ReprParams(3, [], [(1, be ** 3)])
    assert isomorphic(f1, f2)
    a = parse_scalar("a", 3)
    assert not isomorphic(ReprParams(3, [(1, a)], []), ReprParams(3, [(1, a * eps(3))], []))


def test_predict_examples():
    a = parse_scalar("a", 5)
    assert not predict_irreducible([(1, a), (1, a * eps(5, 2))], [], 5)
    assert predict_irreducible([(1, a)], [], 5)
    b = num(3, 2)
    assert not predict_irreducible([], [(1, b), (1, b * eps(3))], 3)
    assert predict_irreducible([], [(1, b), (1, num(3, 3))], 3)


def test_construction_plan_desk_instance():
    plan = construction_plan(parse_poly("(1-2u)(1-u^3)", 3))
    assert plan == {"l": 3, "factors": [{"kind": "ev", "m": 1, "a": "2"}, {"kind": "frob", "n": 1, "b": "1"}]}


def test_construction_plan_refuses_symbolic():
    with pytest.raises(ValueError):
        construction_plan(parse_poly("1-a*u", 3))


# ---------------------------------------------------------------- properties

roots5 = st.lists(st.tuples(st.sampled_from([1, 2, 3, -1]), st.integers(0, 4)), min_size=1, max_size=5)


def _poly_from(l, pairs):
    return PolyOverEps(l, [(num(l, c) * eps(l, k), 1) for c, k in pairs])


@given(roots5, st.randoms(use_true_random=False))
def test_params_independent_of_root_order(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    a = canonical_params(_poly_from(5, pairs))
    b = canonical_params(_poly_from(5, shuffled))
    assert isomorphic(a, b)
    assert a.to_json() == b.to_json()


@given(roots5)
def test_split_multiplies_back(pairs):
    P = _poly_from(5, pairs)
    P0, P1 = factor_P0_P1(P)
    assert (P0.expand() * P1.expand()) == P.expand()


@given(roots5)
def test_params_round_trip(pairs):
    p = canonical_params(_poly_from(5, pairs))
    P = p.to_poly()
    assert P == _poly_from(5, pairs)
    assert canonical_params(P).to_json() == p.to_json()


@given(roots5)
def test_decomposition_is_general_position(pairs):
    P0, _ = factor_P0_P1(_poly_from(5, pairs))
    segs = decompose_into_segments(P0)
    for s, t in itertools.combinations(segs, 2):
        assert general_position(s, t)
    assert sorted(x.sort_key() for s in segs for x in s.elements()) == sorted(x.sort_key() for x in P0.root_multiset())


@given(st.integers(1, 4), st.integers(1, 4), st.sampled_from([1, 2, -3]), st.integers(0, 6))
def test_general_position_symmetric(m, n, c, k):
    l = 7
    s, t = EpsilonSegment(m, num(l, 1)), EpsilonSegment(n, num(l, c) * eps(l, k))
    assert general_position(s, t) == general_position(t, s)


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 6))
def test_general_position_matches_union_shape(m, n, k):
    # on a single eps-orbit, away from full-orbit unions, the ratio test is the union criterion
    l = 7
    s, t = EpsilonSegment(m, num(l, 1)), EpsilonSegment(n, eps(l, k))
    union = list(dict.fromkeys(s.elements() + t.elements()))
    if len(union) >= l:
        return
    from qra.segments import _as_segment
    u = _as_segment(union, l)
    special = u is not None and u.m > max(m, n)
    assert general_position(s, t) == (not special)
