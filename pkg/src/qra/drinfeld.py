"""Highest-weight vectors and Drinfeld polynomials of type I modules.

P_r is never formed from its recursion at eps (which has poles when l | r);
its eigenvalue on a highest-weight vector v is read off from

    P_r v  = (-1)^r eps^(r^2)  k^-r (x_0^+)^(r) (x_1^-)^(r) v,
    P_-r v = (-1)^r eps^(-r^2) k^r  (x_-1^+)^(r) (x_0^-)^(r) v,

both of which only involve divided powers.  Generic modules use q in place of eps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .matrices import Matrix, Subspace, kron, nullspace
from .modules import Module, SpecializedModule, tensor, weight_decomposition
from .ring_tower import PARAM_NAMES, CyclotomicNumber, RationalFunction
from .segments import PPoly
from .ualg_words import GenSymbol, xm, xp

__all__ = [
    "NoStabilization",
    "NotEigen",
    "HighestWeightCertificate",
    "DrinfeldPolynomial",
    "highest_weight_vectors",
    "extract_polynomial",
    "check_multiplicativity",
    "poly_str",
    "poly_mul",
]


class NoStabilization(RuntimeError):
    pass


class NotEigen(ValueError):
    pass


@dataclass
class HighestWeightCertificate:
    vector: list
    weight: int
    window: int
    kernel_dims: dict = field(default_factory=dict)
    index: int = 0

    def to_json(self) -> dict:
        return {"index": self.index, "weight": self.weight, "window": self.window,
                "kernel_dims": {str(k): v for k, v in sorted(self.kernel_dims.items())},
                "vector": [str(x) for x in self.vector]}


def poly_str(coeffs: Sequence, var: str = "u") -> str:
    """Coefficient list as text in the ring_tower grammar."""
    terms = []
    for d, c in enumerate(coeffs):
        if not c:
            continue
        txt = str(c)
        neg = txt.startswith("-") and not any(ch in txt[1:] for ch in " +-")
        if neg:
            txt = txt[1:]
        elif any(ch in txt for ch in " +") or (txt.startswith("-") and " " in txt):
            txt = f"({txt})"
        mono = "" if d == 0 else (var if d == 1 else f"{var}^{d}")
        body = txt if not mono else (mono if txt == "1" else f"{txt}*{mono}")
        terms.append((neg, body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] else "") + terms[0][1]
    for neg, body in terms[1:]:
        out += (" - " if neg else " + ") + body
    return out


def poly_mul(a: Sequence, b: Sequence, zero) -> list:
    out = [zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = out[i + j] + x * y
    return out


def _trim(c: list) -> list:
    c = list(c)
    while len(c) > 1 and not c[-1]:
        c.pop()
    return c


@dataclass
class DrinfeldPolynomial:
    plus: list
    minus: list
    weight: int
    l: int = 0

    @property
    def degree(self) -> int:
        return len(_trim(self.plus)) - 1

    def reciprocity_holds(self) -> bool:
        """minus(u) = Q(u)/Q(0) with Q(u) = u^deg P(1/u)."""
        p = _trim(self.plus)
        n = len(p) - 1
        if not p[n]:
            return False
        want = [p[n - j] / p[n] for j in range(n + 1)]
        return _trim(self.minus) == want

    def to_json(self) -> dict:
        return {"plus": poly_str(_trim(self.plus)), "minus": poly_str(_trim(self.minus)), "weight": self.weight,
                "plus_coeffs": [str(x) for x in _trim(self.plus)],
                "minus_coeffs": [str(x) for x in _trim(self.minus)]}

    def as_ppoly(self) -> PPoly:
        if not self.l:
            raise ValueError("generic polynomials are not PPoly objects")
        return PPoly(self.l, {(d, (0,) * len(PARAM_NAMES)): c for d, c in enumerate(self.plus) if c})


# ---------------------------------------------------------------- highest weight vectors

def _raising(V: Module, r: int) -> list[Matrix]:
    mats = [V.matrix(xp(r))]
    if V.l:
        mats.append(V.matrix(xp(r, V.l)))
    return mats


def highest_weight_vectors(V: Module, max_window: int | None = None) -> list[HighestWeightCertificate]:
    """Joint kernel of x_r^+ (and (x_r^+)^(l) at eps), |r| <= w, per weight space.

    w starts at dim V and grows until the kernel dimension is unchanged for two
    successive enlargements.
    """
    wd = weight_decomposition(V)
    R = V.ring
    d = V.dim
    max_window = max_window if max_window is not None else 3 * d + 4
    spaces = {lam: Subspace(R, len(idx)) for lam, idx in wd.items()}

    def absorb(r: int):
        for M in _raising(V, r):
            for lam, idx in wd.items():
                for row in M.rows:
                    sub = [row[j] for j in idx]
                    if any(sub):
                        spaces[lam].add(sub)

    def kdim() -> int:
        return sum(len(idx) - spaces[lam].dim for lam, idx in wd.items())

    w = d
    for r in range(-w, w + 1):
        absorb(r)
    dims = {w: kdim()}
    stable = 0
    while stable < 2:
        if w >= max_window:
            raise NoStabilization(f"kernel still changing at window {w}: {dims}")
        w += 1
        absorb(w)
        absorb(-w)
        dims[w] = kdim()
        stable = stable + 1 if dims[w] == dims[w - 1] else 0

    certs = []
    for lam in sorted(wd, reverse=True):
        idx = wd[lam]
        rows = spaces[lam].basis or [[R.zero] * len(idx)]
        for kv in nullspace(Matrix._raw(rows, R, len(idx))):
            vec = [R.zero] * d
            for j, x in zip(idx, kv):
                vec[j] = x
            vec = _normalize(vec)
            _certify(V, vec, w)
            certs.append(HighestWeightCertificate(vec, lam, w, dict(dims), len(certs)))
    return certs


def _normalize(v: list) -> list:
    lead = next(x for x in v if x)
    inv = 1 / lead if not isinstance(lead, CyclotomicNumber) else lead ** -1
    return [x * inv if x else x for x in v]


def _certify(V: Module, v: list, w: int):
    """Every (x_r^+)^(m), m <= dim, r in [-1, 1], kills v; x_r^+ for |r| <= w by construction."""
    for r in (-1, 0, 1):
        for m in range(1, V.dim + 1):
            if any(V.matrix(xp(r, m)).matvec(v)):
                raise NotEigen(f"(x_{r}^+)^({m}) does not kill the candidate vector")


# ---------------------------------------------------------------- extraction

def _eigen(M: Matrix, v: list):
    w = M.matvec(v)
    piv = next(i for i, x in enumerate(v) if x)
    c = w[piv] / v[piv]
    if any(wi - c * vi for wi, vi in zip(w, v)):
        raise NotEigen("image is not proportional to the certificate")
    return c


def _qpow(V: Module, e: int):
    if V.l:
        return CyclotomicNumber.eps(V.l) ** e
    return V.ring(RationalFunction.q(e))


def extract_polynomial(V: Module, cert: HighestWeightCertificate, extra: int = 2) -> DrinfeldPolynomial:
    """P^+-(u) on the certified vector; coefficients r > weight are checked to vanish."""
    v = cert.vector
    n = cert.weight
    if n < 0:
        raise NotEigen(f"highest weight {n} is negative")
    kval = _eigen(V.k, v)
    R = V.ring
    plus, minus = [R.one], [R.one]
    for r in range(1, n + extra + 1):
        A = V.matrix(xp(0, r)) * V.matrix(xm(1, r))
        B = V.matrix(xp(-1, r)) * V.matrix(xm(0, r))
        cp = _eigen(A, v) * _qpow(V, r * r) * kval ** (-r) * (-1) ** r
        cm = _eigen(B, v) * _qpow(V, -r * r) * kval ** r * (-1) ** r
        plus.append(cp)
        minus.append(cm)
    for c in plus[n + 1:] + minus[n + 1:]:
        if c:
            raise NotEigen("P_r is nonzero beyond the highest weight")
    P = DrinfeldPolynomial(plus[: n + 1], minus[: n + 1], n, V.l)
    if P.degree != n:
        raise NotEigen(f"degree {P.degree} differs from the highest weight {n}")
    if not P.reciprocity_holds():
        raise NotEigen("minus coefficients are not the reversed plus polynomial")
    return P


def check_multiplicativity(V: Module, W: Module, cv: HighestWeightCertificate | None = None,
                           cw: HighestWeightCertificate | None = None) -> bool:
    """P(V (x) W) at v' (x) v'' equals P(V) P(W), coefficientwise and exactly."""
    cv = cv or highest_weight_vectors(V)[0]
    cw = cw or highest_weight_vectors(W)[0]
    PV, PW = extract_polynomial(V, cv), extract_polynomial(W, cw)
    T = tensor(V, W)
    vec = kron(Matrix._raw([cv.vector], V.ring, V.dim), Matrix._raw([cw.vector], W.ring, W.dim)).rows[0]
    ct = HighestWeightCertificate(vec, cv.weight + cw.weight, 0)
    _certify(T, vec, 0)
    PT = extract_polynomial(T, ct)
    z = T.ring.zero
    return (_trim(PT.plus) == _trim(poly_mul(PV.plus, PW.plus, z))
            and _trim(PT.minus) == _trim(poly_mul(PV.minus, PW.minus, z)))
