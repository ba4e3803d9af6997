from fractions import Fraction

from hypothesis import given, strategies as st

from qra.matrices import Matrix, Subspace, kron, nullspace, rank, rref, solve_in_span
from qra.ring_tower import QQ

entries = st.fractions(min_value=-3, max_value=3, max_denominator=3)


def mats(n, m):
    return st.lists(st.lists(entries, min_size=m, max_size=m), min_size=n, max_size=n).map(lambda r: Matrix(r, QQ))


def test_identity_and_product():
    A = Matrix([[1, 2], [3, 4]], QQ)
    assert A * Matrix.identity(2, QQ) == A
    assert A * A == Matrix([[7, 10], [15, 22]], QQ)


def test_kron_index_convention():
    A = Matrix([[0, 1], [0, 0]], QQ)
    B = Matrix([[1, 0], [0, 2]], QQ)
    K = kron(A, B)
    # (i, j) -> i * 2 + j
    assert K[0, 2] == 1 and K[1, 3] == 2 and K[2, 0] == 0


@given(mats(3, 4))
def test_nullspace_is_killed(M):
    for v in nullspace(M):
        assert not any(M.matvec(v))
    assert rank(M) + len(nullspace(M)) == 4


@given(mats(2, 2), mats(2, 2), mats(2, 2), mats(2, 2))
def test_kron_mixed_product(A, B, C, D):
    assert kron(A, B) * kron(C, D) == kron(A * C, B * D)


@given(st.lists(st.lists(entries, min_size=3, max_size=3), min_size=1, max_size=4))
def test_subspace_matches_rref(vectors):
    S = Subspace(QQ, 3)
    for v in vectors:
        S.add(v)
    basis, _ = rref(vectors, QQ)
    assert S.dim == len(basis)
    assert all(S.contains(v) for v in vectors)


def test_solve_in_span():
    vs = [[1, 0, 1], [0, 1, 1]]
    c = solve_in_span(vs, [2, 3, 5], QQ)
    assert c == [2, 3]
    assert solve_in_span(vs, [0, 0, 1], QQ) is None


def test_power_and_transpose():
    A = Matrix([[1, 1], [0, 1]], QQ)
    assert A ** 5 == Matrix([[1, 5], [0, 1]], QQ)
    assert A.transpose() == Matrix([[1, 0], [1, 1]], QQ)
    assert (A.scale(Fraction(1, 2)))[0, 1] == Fraction(1, 2)
