"""Dense exact matrices over a coefficient ring, with row reduction.

Entries are any scalars from ring_tower (or Fractions). Products skip zero
entries, which pays off on weight-graded tensor modules.
"""
from __future__ import annotations

from typing import Callable, Iterable, Sequence

from .ring_tower import Ring


class Matrix:
    __slots__ = ("rows", "ring", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence], ring: Ring):
        self.ring = ring
        self.rows = [[ring(x) for x in r] for r in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0

    @classmethod
    def _raw(cls, rows: list[list], ring: Ring, ncols: int | None = None) -> "Matrix":
        m = cls.__new__(cls)
        m.rows, m.ring = rows, ring
        m.nrows = len(rows)
        m.ncols = ncols if ncols is not None else (len(rows[0]) if rows else 0)
        return m

    @classmethod
    def zeros(cls, n: int, m: int, ring: Ring) -> "Matrix":
        z = ring.zero
        return cls._raw([[z] * m for _ in range(n)], ring, m)

    @classmethod
    def identity(cls, n: int, ring: Ring) -> "Matrix":
        return cls.diag([ring.one] * n, ring)

    @classmethod
    def diag(cls, entries: Sequence, ring: Ring) -> "Matrix":
        n = len(entries)
        out = cls.zeros(n, n, ring)
        for i, e in enumerate(entries):
            out.rows[i][i] = ring(e)
        return out

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def copy(self) -> "Matrix":
        return Matrix._raw([list(r) for r in self.rows], self.ring, self.ncols)

    def sparse_rows(self) -> list[list[tuple[int, object]]]:
        return [[(j, x) for j, x in enumerate(r) if x] for r in self.rows]

    def is_zero(self) -> bool:
        return not any(x for r in self.rows for x in r)

    def is_diagonal(self) -> bool:
        return all(not x for i, r in enumerate(self.rows) for j, x in enumerate(r) if i != j)

    def diagonal(self) -> list:
        return [self.rows[i][i] for i in range(min(self.nrows, self.ncols))]

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix._raw([[x + y for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                           self.ring, self.ncols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix._raw([[x - y for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                           self.ring, self.ncols)

    def __neg__(self) -> "Matrix":
        return Matrix._raw([[-x for x in r] for r in self.rows], self.ring, self.ncols)

    def scale(self, c) -> "Matrix":
        if not c:
            return Matrix.zeros(self.nrows, self.ncols, self.ring)
        return Matrix._raw([[x * c if x else x for x in r] for r in self.rows], self.ring, self.ncols)

    def __mul__(self, other):
        if not isinstance(other, Matrix):
            return self.scale(other)
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch in product")
        z = self.ring.zero
        brows = other.sparse_rows()
        out = []
        for r in self.rows:
            acc = {}
            for k, a in enumerate(r):
                if not a:
                    continue
                for j, b in brows[k]:
                    p = a * b
                    if j in acc:
                        acc[j] = acc[j] + p
                    else:
                        acc[j] = p
            row = [z] * other.ncols
            for j, v in acc.items():
                row[j] = v
            out.append(row)
        return Matrix._raw(out, self.ring, other.ncols)

    def __rmul__(self, c):
        return self.scale(c)

    def __pow__(self, n: int) -> "Matrix":
        out = Matrix.identity(self.nrows, self.ring)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def matvec(self, v: Sequence) -> list:
        z = self.ring.zero
        out = []
        nz = [(j, x) for j, x in enumerate(v) if x]
        for r in self.rows:
            acc = z
            for j, x in nz:
                a = r[j]
                if a:
                    acc = acc + a * x
            out.append(acc)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix) or self.shape != other.shape:
            return False
        return all(not (x - y) for r, s in zip(self.rows, other.rows) for x, y in zip(r, s))

    __hash__ = None

    def transpose(self) -> "Matrix":
        return Matrix._raw([list(c) for c in zip(*self.rows)] if self.rows else [], self.ring, self.nrows)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int] | None = None) -> "Matrix":
        cols = rows if cols is None else cols
        return Matrix._raw([[self.rows[i][j] for j in cols] for i in rows], self.ring, len(cols))

    def map(self, f: Callable, ring: Ring) -> "Matrix":
        z = ring.zero
        return Matrix._raw([[f(x) if x else z for x in r] for r in self.rows], ring, self.ncols)

    def entries(self) -> Iterable:
        for r in self.rows:
            yield from r

    def __repr__(self):
        return "Matrix([" + ",\n        ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.rows) + "])"


def kron(A: Matrix, B: Matrix) -> Matrix:
    """Kronecker product; index (i, j) flattens to i*B.nrows + j."""
    z = A.ring.zero
    out = [[z] * (A.ncols * B.ncols) for _ in range(A.nrows * B.nrows)]
    bs = B.sparse_rows()
    for i, ra in enumerate(A.rows):
        for k, a in enumerate(ra):
            if not a:
                continue
            for j in range(B.nrows):
                row = out[i * B.nrows + j]
                for l, b in bs[j]:
                    row[k * B.ncols + l] = a * b
    return Matrix._raw(out, A.ring, A.ncols * B.ncols)


def commutator(A: Matrix, B: Matrix) -> Matrix:
    return A * B - B * A


# ---------------------------------------------------------------- row reduction

def rref(vectors: Sequence[Sequence], ring: Ring) -> tuple[list[list], list[int]]:
    """Reduced row echelon form of the given rows; returns (basis rows, pivot columns)."""
    rows = [list(v) for v in vectors]
    basis: list[list] = []
    pivots: list[int] = []
    for v in rows:
        v = _reduce_against(v, basis, pivots)
        p = next((j for j, x in enumerate(v) if x), None)
        if p is None:
            continue
        inv = ring.one / v[p]
        v = [x * inv if x else x for x in v]
        for b in basis:
            c = b[p]
            if c:
                for j, x in enumerate(v):
                    if x:
                        b[j] = b[j] - c * x
        basis.append(v)
        pivots.append(p)
    order = sorted(range(len(pivots)), key=lambda i: pivots[i])
    return [basis[i] for i in order], [pivots[i] for i in order]


def _reduce_against(v: list, basis: list[list], pivots: list[int]) -> list:
    v = list(v)
    for b, p in zip(basis, pivots):
        c = v[p]
        if c:
            for j, x in enumerate(b):
                if x:
                    v[j] = v[j] - c * x
    return v


class Subspace:
    """Incrementally grown subspace with a reduced echelon basis."""

    def __init__(self, ring: Ring, dim: int):
        self.ring = ring
        self.ambient = dim
        self.basis: list[list] = []
        self.pivots: list[int] = []

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: Sequence) -> list:
        return _reduce_against(v, self.basis, self.pivots)

    def contains(self, v: Sequence) -> bool:
        return not any(self.reduce(v))

    def add(self, v: Sequence) -> bool:
        """Insert v; return True if the dimension grew."""
        w = self.reduce(v)
        p = next((j for j, x in enumerate(w) if x), None)
        if p is None:
            return False
        inv = self.ring.one / w[p]
        w = [x * inv if x else x for x in w]
        for b in self.basis:
            c = b[p]
            if c:
                for j, x in enumerate(w):
                    if x:
                        b[j] = b[j] - c * x
        self.basis.append(w)
        self.pivots.append(p)
        return True


def rank(M: Matrix) -> int:
    return len(rref(M.rows, M.ring)[0])


def nullspace(M: Matrix) -> list[list]:
    """Basis of {v : M v = 0}, one vector per free column, normalized at the free entry."""
    basis, pivots = rref(M.rows, M.ring)
    ring = M.ring
    free = [j for j in range(M.ncols) if j not in set(pivots)]
    out = []
    for f in free:
        v = [ring.zero] * M.ncols
        v[f] = ring.one
        for b, p in zip(basis, pivots):
            if b[f]:
                v[p] = -b[f]
        out.append(v)
    return out


def stack(mats: Sequence[Matrix]) -> Matrix:
    rows = [r for m in mats for r in m.rows]
    return Matrix._raw(rows, mats[0].ring, mats[0].ncols)


def solve_in_span(vectors: Sequence[Sequence], target: Sequence, ring: Ring) -> list | None:
    """Coefficients c with sum c_i vectors[i] = target, or None."""
    n = len(vectors)
    # augmented rows on the transpose: columns are the vectors
    dim = len(target)
    rows = [[vectors[i][k] for i in range(n)] + [target[k]] for k in range(dim)]
    basis, pivots = rref(rows, ring)
    if n in pivots:
        return None
    c = [ring.zero] * n
    for b, p in zip(basis, pivots):
        c[p] = b[n]
    return c
