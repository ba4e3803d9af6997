"""epsilon-segments, the P = P0 * P1 split, classification parameters and
construction plans.

Polynomials arrive factored (``(1-2u)(1-u^3)``) or as a list of inverse roots,
so no factorization over Q(eps) is ever attempted.  Scalars live in
Q(eps)[a^+-1, b^+-1, ...]; a root is a monomial in the parameters times a
nonzero element of Q(eps), which is all the multiplicative data we need to
compare ratios.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .modules import validate_l
from .ring_tower import PARAM_NAMES, CyclotomicNumber, ParseError, parse_expr

__all__ = [
    "OrbitDetected",
    "EpsScalar",
    "PPoly",
    "PolyOverEps",
    "EpsilonSegment",
    "ReprParams",
    "parse_poly",
    "general_position",
    "decompose_into_segments",
    "factor_P0_P1",
    "canonical_params",
    "isomorphic",
    "predict_irreducible",
    "construction_plan",
]

_NP = len(PARAM_NAMES)


class OrbitDetected(ValueError):
    pass


def _mono_str(mono: tuple) -> str:
    parts = []
    for name, e in zip(PARAM_NAMES, mono):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


class EpsScalar:
    """c * (parameter monomial) with c a nonzero element of Q(eps)."""

    __slots__ = ("mono", "val")

    def __init__(self, val: CyclotomicNumber, mono: tuple = (0,) * _NP):
        if not val:
            raise ValueError("EpsScalar must be nonzero")
        self.val, self.mono = val, tuple(mono)

    @property
    def l(self) -> int:
        return self.val.l

    def __mul__(self, other: "EpsScalar") -> "EpsScalar":
        if isinstance(other, CyclotomicNumber):
            return EpsScalar(self.val * other, self.mono)
        return EpsScalar(self.val * other.val, tuple(x + y for x, y in zip(self.mono, other.mono)))

    def __truediv__(self, other: "EpsScalar") -> "EpsScalar":
        return EpsScalar(self.val / other.val, tuple(x - y for x, y in zip(self.mono, other.mono)))

    def __pow__(self, n: int) -> "EpsScalar":
        return EpsScalar(self.val ** n, tuple(x * n for x in self.mono))

    def __eq__(self, other) -> bool:
        return isinstance(other, EpsScalar) and self.mono == other.mono and self.val == other.val

    def __hash__(self):
        return hash((self.mono, tuple(self.val.residue)))

    def ratio(self, other: "EpsScalar") -> CyclotomicNumber | None:
        """self/other if it lies in Q(eps), else None."""
        if self.mono != other.mono:
            return None
        return self.val / other.val

    def eps_log_ratio(self, other: "EpsScalar") -> int | None:
        """k in [0, l) with self = eps^k * other, or None."""
        r = self.ratio(other)
        if r is None:
            return None
        e = CyclotomicNumber.eps(self.l)
        p = CyclotomicNumber(self.l, 1)
        for k in range(self.l):
            if r == p:
                return k
            p = p * e
        return None

    def sort_key(self) -> tuple:
        return (self.mono, tuple(self.val.residue))

    def __str__(self) -> str:
        m = _mono_str(self.mono)
        v = str(self.val)
        if not m:
            return v
        if v == "1":
            return m
        if v == "-1":
            return "-" + m
        if " " in v:
            v = f"({v})"
        return f"{v}*{m}"

    __repr__ = __str__


class PPoly:
    """Polynomial in u over Q(eps)[params^+-1]; keys are (u-degree, monomial)."""

    def __init__(self, l: int, terms: dict | None = None):
        self.l = l
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def const(cls, l: int, c) -> "PPoly":
        return cls(l, {(0, (0,) * _NP): CyclotomicNumber(l, c) if not isinstance(c, CyclotomicNumber) else c})

    @classmethod
    def u(cls, l: int) -> "PPoly":
        return cls(l, {(1, (0,) * _NP): CyclotomicNumber(l, 1)})

    @classmethod
    def param(cls, l: int, name: str) -> "PPoly":
        mono = tuple(1 if n == name else 0 for n in PARAM_NAMES)
        return cls(l, {(0, mono): CyclotomicNumber(l, 1)})

    @classmethod
    def scalar(cls, s: EpsScalar) -> "PPoly":
        return cls(s.l, {(0, s.mono): s.val})

    def _coerce(self, other) -> "PPoly":
        return other if isinstance(other, PPoly) else PPoly.const(self.l, other)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t[k] + v if k in t else v
        return PPoly(self.l, t)

    __radd__ = __add__

    def __neg__(self):
        return PPoly(self.l, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        t: dict = {}
        for (d1, m1), v1 in self.terms.items():
            for (d2, m2), v2 in other.terms.items():
                k = (d1 + d2, tuple(x + y for x, y in zip(m1, m2)))
                p = v1 * v2
                t[k] = t[k] + p if k in t else p
        return PPoly(self.l, t)

    __rmul__ = __mul__

    def as_scalar(self) -> EpsScalar | None:
        if len(self.terms) != 1:
            return None
        (d, m), v = next(iter(self.terms.items()))
        return EpsScalar(v, m) if d == 0 else None

    def _inverse(self) -> "PPoly":
        s = self.as_scalar()
        if s is None:
            raise ParseError("can only divide by a nonzero monomial scalar")
        inv = EpsScalar(CyclotomicNumber(self.l, 1)) / s
        return PPoly.scalar(inv)

    def __truediv__(self, other):
        return self * self._coerce(other)._inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self._inverse()

    def __pow__(self, n: int) -> "PPoly":
        base = self if n >= 0 else self._inverse()
        out = PPoly.const(self.l, 1)
        for _ in range(abs(n)):
            out = out * base
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, PPoly) and not (self - other).terms

    def degree(self) -> int:
        return max((d for d, _ in self.terms), default=-1)

    def coefficient(self, d: int) -> "PPoly":
        return PPoly(self.l, {(0, m): v for (dd, m), v in self.terms.items() if dd == d})

    def numeric_coeffs(self) -> list[CyclotomicNumber]:
        """Coefficient list when no parameters occur."""
        out = [CyclotomicNumber(self.l, 0)] * (self.degree() + 1)
        for (d, m), v in self.terms.items():
            if any(m):
                raise ValueError("polynomial has symbolic parameters")
            out[d] = v
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for d in sorted({d for d, _ in self.terms}):
            c = self.coefficient(d)
            s = c.as_scalar()
            if s is not None and not any(s.mono) and s.val.is_rational():
                body, neg = _frac_term(s.val.to_fraction(), d)
            elif s is not None:
                txt = str(s)
                neg = txt.startswith("-") and " " not in txt
                txt = txt[1:] if neg else txt
                body = _u_term(txt if " " not in txt else f"({txt})", d)
            else:
                inner = " + ".join(str(EpsScalar(v, m)) for (_, m), v in sorted(c.terms.items()))
                body, neg = _u_term(f"({inner})", d), False
            out.append((neg, body))
        text = ("-" if out[0][0] else "") + out[0][1]
        for neg, body in out[1:]:
            text += (" - " if neg else " + ") + body
        return text


def _u_mono(d: int) -> str:
    return "" if d == 0 else ("u" if d == 1 else f"u^{d}")


def _u_term(coef: str, d: int) -> str:
    m = _u_mono(d)
    if not m:
        return coef
    return m if coef == "1" else f"{coef}*{m}"


def _frac_term(c: Fraction, d: int) -> tuple[str, bool]:
    neg = c < 0
    a = -c if neg else c
    return _u_term(str(a), d), neg


# ---------------------------------------------------------------- parsing

_ATOM_NAMES = sorted(("eps", "q", "u") + PARAM_NAMES, key=len, reverse=True)


def _split_ident(m: re.Match) -> str:
    word, out = m.group(0), []
    while word:
        for name in _ATOM_NAMES:
            if word.startswith(name):
                out.append(name)
                word = word[len(name):]
                break
        else:
            raise ParseError(f"unknown symbol in {m.group(0)!r}")
    return "*".join(out)


def _parse_ppoly(text: str, l: int) -> PPoly:
    text = re.sub(r"[A-Za-z_][A-Za-z_0-9]*", _split_ident, text)
    e = PPoly.const(l, CyclotomicNumber.eps(l))
    atoms = {"u": PPoly.u(l), "eps": e, "q": e}
    atoms.update({p: PPoly.param(l, p) for p in PARAM_NAMES})
    return parse_expr(text, atoms, lambda c: PPoly.const(l, c))


def parse_scalar(text: str, l: int) -> EpsScalar:
    s = _parse_ppoly(str(text), l).as_scalar()
    if s is None:
        raise ParseError(f"{text!r} is not a nonzero monomial scalar")
    return s


def _split_factors(text: str) -> list[tuple[str, int]]:
    """Top-level '(...)^k' factors; a bare expression is one factor."""
    text = text.strip()
    out, i = [], 0
    if not text.startswith("("):
        return [(text, 1)]
    while i < len(text):
        while i < len(text) and text[i] in " *":
            i += 1
        if i >= len(text):
            break
        if text[i] != "(":
            return [(text, 1)]
        depth, j = 0, i
        while j < len(text):
            depth += {"(": 1, ")": -1}.get(text[j], 0)
            if depth == 0:
                break
            j += 1
        if depth:
            raise ParseError("unbalanced parentheses")
        body = text[i + 1:j]
        i = j + 1
        k = 1
        m = re.match(r"\s*(\^|\*\*)\s*(\d+)", text[i:])
        if m:
            k = int(m.group(2))
            i += m.end()
        out.append((body, k))
    return out


@dataclass
class OrbitFactor:
    """(1 - c u^l)^mult; b is a known l-th root of c, if any."""
    c: EpsScalar
    mult: int
    b: EpsScalar | None = None


class PolyOverEps:
    """P(u) with P(0) = 1 held as inverse roots plus (1 - c u^l) factors."""

    def __init__(self, l: int, roots: Iterable[tuple[EpsScalar, int]] = (), orbits: Iterable[OrbitFactor] = ()):
        self.l = validate_l(l)
        self.roots: list[tuple[EpsScalar, int]] = []
        for r, k in roots:
            if k > 0:
                self.roots.append((r, k))
        self.orbits = [o for o in orbits if o.mult > 0]

    def root_multiset(self) -> list[EpsScalar]:
        return [r for r, k in self.roots for _ in range(k)]

    def expand(self) -> PPoly:
        l = self.l
        out = PPoly.const(l, 1)
        u = PPoly.u(l)
        for r, k in self.roots:
            out = out * (1 - PPoly.scalar(r) * u) ** k
        for o in self.orbits:
            out = out * (1 - PPoly.scalar(o.c) * u ** l) ** o.mult
        return out

    def coeffs(self) -> list[CyclotomicNumber]:
        return self.expand().numeric_coeffs()

    def degree(self) -> int:
        return sum(k for _, k in self.roots) + self.l * sum(o.mult for o in self.orbits)

    def __str__(self):
        return str(self.expand())

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyOverEps) and self.expand() == other.expand()


def parse_poly(text: str, l: int) -> PolyOverEps:
    """Factored text such as ``(1-2u)(1-u^3)^2`` or a JSON root list ``{"roots":[{"val":"2","mult":1}]}``."""
    validate_l(l)
    text = text.strip()
    if text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed root list: {exc}") from None
        roots = []
        for item in data.get("roots", []):
            mult = item.get("mult", 1)
            if not isinstance(mult, int) or mult < 1:
                raise ParseError("root multiplicity must be a positive integer")
            roots.append((parse_scalar(str(item["val"]), l), mult))
        return PolyOverEps(l, roots)
    roots, orbits = [], []
    for body, k in _split_factors(text):
        F = _parse_ppoly(body, l)
        degs = sorted({d for d, _ in F.terms})
        c0 = F.coefficient(0).as_scalar()
        if c0 is None:
            raise ParseError(f"factor {body!r} needs a monomial constant term")
        if degs == [0]:
            continue
        top = F.coefficient(degs[-1]).as_scalar()
        if len(degs) != 2 or top is None:
            raise ParseError(f"factor {body!r} must look like (1 - a u) or (1 - c u^{l})")
        r = EpsScalar(-top.val, top.mono) / c0
        if degs[1] == 1:
            roots.append((r, k))
        elif degs[1] == l:
            orbits.append(OrbitFactor(r, k))
        else:
            raise ParseError(f"factor {body!r} has degree {degs[1]}; only 1 and l={l} are supported")
    return PolyOverEps(l, roots, orbits)


# ---------------------------------------------------------------- segments

@dataclass(frozen=True)
class EpsilonSegment:
    m: int
    a: EpsScalar

    def elements(self) -> list[EpsScalar]:
        e = CyclotomicNumber.eps(self.a.l)
        return [self.a * (e ** (self.m - 1 - 2 * i)) for i in range(self.m)]

    def to_json(self) -> list:
        return [self.m, str(self.a)]

    def sort_key(self):
        return (self.m, self.a.sort_key())


def _as_segment(elems: Sequence[EpsScalar], l: int) -> EpsilonSegment | None:
    """The segment whose element set is `elems` (distinct), or None."""
    m = len(elems)
    if m == 0 or m >= l:
        return None
    a0 = elems[0]
    inv2 = pow(2, -1, l)
    js = []
    for x in elems:
        k = x.eps_log_ratio(a0)
        if k is None:
            return None
        js.append(k * inv2 % l)
    js = sorted(set(js))
    if len(js) != m:
        return None
    # find a cyclic interval start
    present = set(js)
    for start in js:
        if all((start + i) % l in present for i in range(m)):
            e = CyclotomicNumber.eps(l)
            return EpsilonSegment(m, a0 * e ** ((2 * start + m - 1) % l))
    return None


def general_position(s: EpsilonSegment, t: EpsilonSegment) -> bool:
    """Condition a_s/a_t != eps^{+-(m_s+m_t-2p)} for 0 <= p < min(m_s, m_t)."""
    l = s.a.l
    if t.a.l != l:
        raise ValueError("segments over different l")
    k = s.a.eps_log_ratio(t.a)
    if k is None:
        return True
    for p in range(min(s.m, t.m)):
        d = s.m + t.m - 2 * p
        if k % l in (d % l, (-d) % l):
            return False
    return True


def _union_segment(s: EpsilonSegment, t: EpsilonSegment) -> EpsilonSegment | None:
    """Union as a segment longer than both, if that is what it is."""
    elems = list(dict.fromkeys(s.elements() + t.elements()))
    u = _as_segment(elems, s.a.l)
    if u is None or u.m <= max(s.m, t.m):
        return None
    return u


def decompose_into_segments(P: PolyOverEps) -> list[EpsilonSegment]:
    """Partition the inverse roots into segments pairwise in general position."""
    l = P.l
    if P.orbits:
        raise OrbitDetected("strip (1 - c u^l) factors with factor_P0_P1 first")
    segs = [EpsilonSegment(1, r) for r in P.root_multiset()]
    changed = True
    while changed:
        changed = False
        segs.sort(key=EpsilonSegment.sort_key)
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                u = _union_segment(segs[i], segs[j])
                if u is not None:
                    # S, T -> S u T, S n T keeps the root multiset
                    tj = set(segs[j].elements())
                    meet = [x for x in segs[i].elements() if x in tj]
                    rest = [s for k, s in enumerate(segs) if k not in (i, j)] + [u]
                    if meet:
                        m = _as_segment(meet, l)
                        if m is None:
                            raise OrbitDetected("intersection of two segments is not a segment")
                        rest.append(m)
                    segs = rest
                    changed = True
                    break
            if changed:
                break
    for s in segs:
        if s.m >= l:
            raise OrbitDetected(f"segment of length {s.m} >= l")
    for i, s in enumerate(segs):
        for t in segs[i + 1:]:
            if not general_position(s, t):
                raise OrbitDetected("greedy merge left a special-position pair")
    return sorted(segs, key=EpsilonSegment.sort_key)


def factor_P0_P1(P: PolyOverEps, l: int | None = None) -> tuple[PolyOverEps, PolyOverEps]:
    """Split off full eps-orbits of inverse roots as (1 - b^l u^l) factors."""
    l = P.l if l is None else l
    if l != P.l:
        raise ValueError("l mismatch")
    e = CyclotomicNumber.eps(l)
    mult: dict[EpsScalar, int] = {}
    for r, k in P.roots:
        mult[r] = mult.get(r, 0) + k
    orbits = list(P.orbits)
    groups: dict[EpsScalar, list[EpsScalar]] = {}
    for r in mult:
        groups.setdefault(r ** l, []).append(r)
    for c in sorted(groups, key=EpsScalar.sort_key):
        base = min(groups[c], key=EpsScalar.sort_key)
        orbit = [base * e ** j for j in range(l)]
        full = min(mult.get(x, 0) for x in orbit)
        if full:
            for x in orbit:
                mult[x] -= full
            orbits.append(OrbitFactor(c, full, base))
    P0 = PolyOverEps(l, [(r, k) for r, k in mult.items() if k], [])
    P1 = PolyOverEps(l, [], orbits)
    return P0, P1


@dataclass
class ReprParams:
    l: int
    segments: list[tuple[int, EpsScalar]]
    frobenius: list[tuple[int, EpsScalar]]  # (n, b^l)

    def to_json(self) -> dict:
        return {"segments": [[m, str(a)] for m, a in self.segments],
                "frobenius": [[n, str(c)] for n, c in self.frobenius]}

    def to_poly(self) -> PolyOverEps:
        roots = []
        for m, a in self.segments:
            roots += [(x, 1) for x in EpsilonSegment(m, a).elements()]
        return PolyOverEps(self.l, roots, [OrbitFactor(c, n) for n, c in self.frobenius])


def _grouped_orbits(P1: PolyOverEps) -> list[OrbitFactor]:
    merged: dict[EpsScalar, OrbitFactor] = {}
    for o in P1.orbits:
        if o.c in merged:
            merged[o.c].mult += o.mult
            merged[o.c].b = merged[o.c].b or o.b
        else:
            merged[o.c] = OrbitFactor(o.c, o.mult, o.b)
    return sorted(merged.values(), key=lambda o: (o.mult, o.c.sort_key()))


def canonical_params(P: PolyOverEps, l: int | None = None) -> ReprParams:
    P0, P1 = factor_P0_P1(P, l)
    segs = decompose_into_segments(P0)
    return ReprParams(P.l, [(s.m, s.a) for s in segs], [(o.mult, o.c) for o in _grouped_orbits(P1)])


def isomorphic(p1: ReprParams, p2: ReprParams) -> bool:
    if p1.l != p2.l:
        raise ValueError("parameters over different l")
    key = lambda xs: sorted(((m, a.sort_key()) for m, a in xs))  # noqa: E731
    return key(p1.segments) == key(p2.segments) and key(p1.frobenius) == key(p2.frobenius)


def predict_irreducible(segments: Sequence[tuple[int, EpsScalar]], frobenius: Sequence[tuple[int, EpsScalar]],
                        l: int) -> bool:
    """Tensor product of V(m_t)_{a_t} and Frobenius factors (n_u, b_u) is irreducible iff
    the segments are pairwise in general position and the b_u^l are distinct."""
    for m, _ in segments:
        if not 0 <= m < l:
            raise ValueError(f"segment length {m} not below l={l}")
    segs = [EpsilonSegment(m, a) for m, a in segments if m > 0]
    for i, s in enumerate(segs):
        for t in segs[i + 1:]:
            if not general_position(s, t):
                return False
    powers = [b ** l for n, b in frobenius if n > 0]
    return len(set(powers)) == len(powers)


def _lth_root(c: EpsScalar, l: int) -> EpsScalar | None:
    """An l-th root of c inside Q(eps)[params], found for rational values only."""
    if any(x % l for x in c.mono) or not c.val.is_rational():
        return None
    f = c.val.to_fraction()
    sign = -1 if f < 0 else 1
    num, den = _int_root(abs(f.numerator), l), _int_root(f.denominator, l)
    if num is None or den is None:
        return None
    # l is odd, so a negative value has the negative real root
    return EpsScalar(CyclotomicNumber(l, Fraction(sign * num, den)), tuple(x // l for x in c.mono))


def _int_root(n: int, l: int) -> int | None:
    r = round(n ** (1.0 / l)) if n else 0
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** l == n:
            return cand
    return None


def construction_plan(P: PolyOverEps, l: int | None = None) -> dict:
    """Module descriptor realizing V(P): evaluation factors for the segments, Frobenius factors for P1."""
    P0, P1 = factor_P0_P1(P, l)
    factors = []
    for s in decompose_into_segments(P0):
        if any(s.a.mono):
            raise ValueError("symbolic parameters cannot be built at a root of unity")
        factors.append({"kind": "ev", "m": s.m, "a": str(s.a)})
    for o in _grouped_orbits(P1):
        b = o.b or _lth_root(o.c, P.l)
        if b is None:
            raise ValueError(f"no l-th root of {o.c} found; give P through its inverse roots")
        if any(b.mono):
            raise ValueError("symbolic parameters cannot be built at a root of unity")
        factors.append({"kind": "frob", "n": o.mult, "b": str(b)})
    if not factors:
        factors.append({"kind": "ev", "m": 0, "a": "1"})
    return {"l": P.l, "factors": factors}
