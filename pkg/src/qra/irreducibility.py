"""Submodule-closure (spinning) oracle for irreducibility over Q(eps).

A verdict of "irreducible" rests on three facts checked exactly: the joint
kernel of the raising operators is a line, that line generates everything,
and every weight-basis seed generates everything in the module and in its
dual (transposed generators).  A "reducible" verdict always carries a proper
subspace that has been re-checked to be invariant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .drinfeld import highest_weight_vectors
from .matrices import Matrix, Subspace, nullspace
from .modules import Module, evaluation_twist, make_Vn, tensor_all
from .ring_tower import parse_cyclotomic
from .segments import EpsScalar, predict_irreducible
from .ualg_words import GenSymbol, xm, xp

__all__ = [
    "ClosureResult",
    "IrreducibilityVerdict",
    "default_genset",
    "submodule_closure",
    "is_irreducible",
    "crosscheck_grid",
    "DEFAULT_RATIOS",
]


@dataclass
class ClosureResult:
    seed: list
    generators: str
    basis: list
    dim: int


@dataclass
class IrreducibilityVerdict:
    irreducible: bool
    window: int
    witness: list | None = None
    seed: str | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"verdict": "irreducible" if self.irreducible else "reducible", "window": self.window}
        if not self.irreducible:
            out["witness_dim"] = len(self.witness)
            out["seed"] = self.seed
        out.update(self.details)
        return out


def default_genset(V: Module, window: int | None = None) -> tuple[list[Matrix], str]:
    """e_1^+-, e_0^+-, k, [k;0 l] and (x_r^+-)^(l) for |r| <= window."""
    w = V.dim if window is None else window
    mats = [V.e1p, V.e1m, V.k]
    names = ["e1+", "e1-", "k"]
    try:
        mats += [V.e0p, V.e0m]
        names += ["e0+", "e0-"]
    except Exception:  # a module without loop action: U_q(sl2) only
        pass
    if V.l:
        mats.append(V.matrix(GenSymbol("kb", 0, V.l)))
        names.append(f"[k;0 {V.l}]")
        for r in range(-w, w + 1):
            mats.append(V.matrix(xp(r, V.l)))
            mats.append(V.matrix(xm(r, V.l)))
        names.append(f"(x_r^+-)^({V.l}) for |r| <= {w}")
    mats = [M for M in mats if not M.is_zero()]
    return mats, ", ".join(names)


def _closure(mats: Sequence[Matrix], seed: list, R) -> Subspace:
    S = Subspace(R, len(seed))
    if not S.add(seed):
        return S
    frontier = [list(S.basis[-1])]
    while frontier:
        v = frontier.pop()
        for M in mats:
            w = M.matvec(v)
            if any(w) and S.add(w):
                frontier.append(list(S.basis[-1]))
                if S.dim == len(seed):
                    return S
    return S


def submodule_closure(V: Module, seed: Sequence, genset: Sequence[Matrix] | None = None) -> ClosureResult:
    """Smallest genset-invariant subspace containing seed."""
    R = V.ring
    seed = [R(x) for x in seed]
    if genset is None:
        genset, desc = default_genset(V)
    else:
        desc = f"{len(genset)} supplied matrices"
    S = _closure(genset, seed, R)
    basis = [list(b) for b in S.basis]
    if not _invariant(genset, basis, R):
        raise AssertionError("closure is not invariant")
    return ClosureResult(seed, desc, basis, len(basis))


def _invariant(mats: Sequence[Matrix], basis: list, R) -> bool:
    S = Subspace(R, len(basis[0]) if basis else 0)
    for b in basis:
        S.add(b)
    return all(S.contains(M.matvec(b)) for M in mats for b in basis)


def _unit(R, d: int, i: int) -> list:
    v = [R.zero] * d
    v[i] = R.one
    return v


def is_irreducible(V: Module, window: int | None = None) -> IrreducibilityVerdict:
    R, d = V.ring, V.dim
    w = d if window is None else window
    gens, _ = default_genset(V, w)
    wider, _ = default_genset(V, w + 2)

    def reducible(basis, seed):
        if not _invariant(wider, basis, R):
            raise AssertionError("witness subspace is not invariant under the wider generator set")
        return IrreducibilityVerdict(False, w, basis, seed)

    certs = highest_weight_vectors(V)
    seeds = [(f"w[{c.index}]", c.vector) for c in certs] + [(f"e[{i}]", _unit(R, d, i)) for i in range(d)]
    for name, s in seeds:
        S = _closure(gens, s, R)
        if S.dim < d:
            return reducible([list(b) for b in S.basis], name)
    tgens = [M.transpose() for M in gens]
    for i in range(d):
        S = _closure(tgens, _unit(R, d, i), R)
        if S.dim < d:
            # the annihilator of a dual submodule is a submodule of V
            ann = nullspace(Matrix._raw([list(b) for b in S.basis], R, d))
            return reducible(ann, f"dual:e[{i}]")
    if len(certs) != 1:
        raise AssertionError(f"{len(certs)} highest-weight lines but no proper closure found")
    return IrreducibilityVerdict(True, w, details={"highest_weight": certs[0].weight})


DEFAULT_RATIOS = ("1", "2", "eps", "eps^2", "2*eps")


def crosscheck_grid(l: int = 3, ms: Sequence[int] = (1, 2), ratios: Sequence[str] = DEFAULT_RATIOS,
                    a: str = "1", triples: Sequence[Sequence[tuple[int, str]]] = ()) -> list[dict]:
    """Compare the segment criterion with the closure oracle on tensors V(m)_a (x) V(n)_b."""
    points = [[(m, a), (n, _mul(a, r, l))] for m in ms for n in ms for r in ratios]
    points += [list(t) for t in triples]
    report = []
    for factors in points:
        scal = [(m, parse_cyclotomic(x, l)) for m, x in factors]
        segs = [(m, EpsScalar(c)) for m, c in scal]
        predicted = predict_irreducible(segs, [], l)
        V = tensor_all([evaluation_twist(make_Vn(m, "specialized", l), c) for m, c in scal])
        verdict = is_irreducible(V)
        report.append({
            "factors": [[m, str(c)] for m, c in scal],
            "predicted": predicted,
            "oracle": verdict.irreducible,
            "status": "pass" if predicted == verdict.irreducible else "fail",
        })
    return report


def _mul(a: str, r: str, l: int) -> str:
    return str(parse_cyclotomic(a, l) * parse_cyclotomic(r, l))
