"""Formal elements of U_q(affine sl2): linear combinations of words in
Drinfeld-type generator symbols, the automorphisms T, Omega, Phi, and
builders for P_n, D_n^{+-}(xi^(r)), the boldface D_n, A_{r,n} and B_{r,n}.

No normal form is attempted; equality is decided by evaluation on modules.
"""
from __future__ import annotations

import itertools
import re
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, NamedTuple

from .ring_tower import RationalFunction, parse_rational, qfact, qint

KINDS = ("x+", "x-", "k", "h", "psi+", "psi-", "P", "kb", "e0+", "e0-")


class UnsupportedSymbol(ValueError):
    pass


class GenSymbol(NamedTuple):
    """kind in KINDS; idx is the loop index (exponent for k, shift n for kb);
    r is the divided-power order (x, e0) or the binomial order (kb)."""

    kind: str
    idx: int = 0
    r: int = 1

    def __str__(self) -> str:
        if self.kind == "kb":
            return f"kb[{self.idx},{self.r}]"
        if self.kind in ("e0+", "e0-"):
            return self.kind + (f"^({self.r})" if self.r != 1 else "")
        base = f"{self.kind}[{self.idx}]"
        if self.r != 1:
            base += f"^({self.r})"
        return base


def xp(n: int, r: int = 1) -> GenSymbol:
    return GenSymbol("x+", n, r)


def xm(n: int, r: int = 1) -> GenSymbol:
    return GenSymbol("x-", n, r)


def kk(e: int = 1) -> GenSymbol:
    return GenSymbol("k", e)


Word = tuple  # tuple[GenSymbol, ...]

_SYM_RE = re.compile(r"(x\+|x-|psi\+|psi-|P|h|k|kb|e0\+|e0-)(?:\[(-?\d+)(?:,(\d+))?\])?(?:\^\((\d+)\))?")


def parse_symbol(text: str) -> GenSymbol:
    m = _SYM_RE.fullmatch(text.strip())
    if not m:
        raise ValueError(f"bad symbol {text!r}")
    kind, idx, r2, r = m.groups()
    if kind == "kb":
        return GenSymbol("kb", int(idx), int(r2))
    return GenSymbol(kind, int(idx or 0), int(r or 1))


def _coerce(c) -> RationalFunction:
    if isinstance(c, RationalFunction):
        return c
    return RationalFunction(c)


class AlgElement:
    """Finite sum  coefficient * word; coefficients live in Q(q)."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms: dict = {}
        if terms:
            for w, c in terms.items():
                c = _coerce(c)
                if c:
                    w = _normalize_word(w)
                    if w in self.terms:
                        s = self.terms[w] + c
                        if s:
                            self.terms[w] = s
                        else:
                            del self.terms[w]
                    else:
                        self.terms[w] = c

    @classmethod
    def one(cls) -> "AlgElement":
        return cls({(): 1})

    @classmethod
    def zero(cls) -> "AlgElement":
        return cls()

    @classmethod
    def sym(cls, s: GenSymbol, coeff=1) -> "AlgElement":
        return cls({(s,): coeff})

    @classmethod
    def word(cls, symbols: Iterable[GenSymbol], coeff=1) -> "AlgElement":
        return cls({tuple(symbols): coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other: "AlgElement") -> "AlgElement":
        out = dict(self.terms)
        for w, c in other.terms.items():
            if w in out:
                s = out[w] + c
                if s:
                    out[w] = s
                else:
                    del out[w]
            else:
                out[w] = c
        return AlgElement._raw(out)

    @classmethod
    def _raw(cls, terms: dict) -> "AlgElement":
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    def __neg__(self):
        return AlgElement._raw({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "AlgElement":
        c = _coerce(c)
        if not c:
            return AlgElement()
        return AlgElement._raw({w: x * c for w, x in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, AlgElement):
            return self.scale(other)
        out: dict = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = _normalize_word(w1 + w2)
                c = c1 * c2
                if w in out:
                    s = out[w] + c
                    if s:
                        out[w] = s
                    else:
                        del out[w]
                else:
                    out[w] = c
        return AlgElement._raw(out)

    def __rmul__(self, c):
        return self.scale(c)

    def __pow__(self, n: int) -> "AlgElement":
        out = AlgElement.one()
        for _ in range(n):
            out = out * self
        return out

    def symbols(self) -> set:
        return {s for w in self.terms for s in w}

    def max_degree(self) -> int:
        return max((sum(s.r for s in w) for w in self.terms), default=0)

    def coefficient(self, word) -> RationalFunction:
        return self.terms.get(_normalize_word(tuple(word)), RationalFunction())

    def map_words(self, f, coeff_map=None) -> "AlgElement":
        """Apply f: word -> (sign/scalar, word) and optionally a coefficient map."""
        out = AlgElement()
        acc: dict = {}
        for w, c in self.terms.items():
            scalar, nw = f(w)
            c2 = coeff_map(c) if coeff_map else c
            acc.setdefault(_normalize_word(nw), []).append(c2 * scalar)
        return AlgElement({w: sum(cs[1:], cs[0]) for w, cs in acc.items()})

    def __eq__(self, other):
        """Syntactic equality of the free combination (not algebra equality)."""
        if not isinstance(other, AlgElement):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        items = sorted((word_str(w), c) for w, c in self.terms.items())
        return " + ".join(f"({c})*{ws}" for ws, c in items)

    def __repr__(self):
        return f"AlgElement({self})"


def word_str(w: Word) -> str:
    return ".".join(str(s) for s in w) if w else "1"


def parse_element(text: str) -> AlgElement:
    """Inverse of str(AlgElement) for the canonical text form."""
    text = text.strip()
    if text == "0":
        return AlgElement()
    out = AlgElement()
    for part in _split_top(text):
        m = re.fullmatch(r"\((.*)\)\*(.+)", part.strip())
        if not m:
            raise ValueError(f"bad term {part!r}")
        coeff = parse_rational(m.group(1))
        ws = m.group(2).strip()
        word = () if ws == "1" else tuple(parse_symbol(s) for s in ws.split("."))
        out = out + AlgElement({word: coeff})
    return out


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and text.startswith(" + ", i):
            parts.append(cur)
            cur = ""
            i += 3
            continue
        cur += ch
        i += 1
    parts.append(cur)
    return parts


def _normalize_word(w: Word) -> Word:
    """Drop P[0] and k^0; merge adjacent powers of k."""
    out = []
    for s in w:
        if s.kind == "P" and s.idx == 0:
            continue
        if s.kind == "k":
            if out and out[-1].kind == "k":
                e = out[-1].idx + s.idx
                out.pop()
                if e:
                    out.append(GenSymbol("k", e))
                continue
            if s.idx == 0:
                continue
        out.append(s)
    return tuple(out)


# ---------------------------------------------------------------- automorphisms

def _t_symbol(s: GenSymbol, p: int) -> tuple[int, GenSymbol]:
    sign = -1 if (p * s.r) % 2 else 1
    if s.kind == "x+":
        return sign, GenSymbol("x+", s.idx - p, s.r)
    if s.kind == "x-":
        return sign, GenSymbol("x-", s.idx + p, s.r)
    if s.kind in ("psi+", "psi-", "h", "k", "P", "kb"):
        return 1, s
    raise UnsupportedSymbol(f"T has no image recorded for {s}")


def apply_T(e: AlgElement, power: int = 1) -> AlgElement:
    """T(x_n^+-) = -x_{n-+1}^+-, fixing psi, h, k, P and kb."""

    def f(w):
        sign = 1
        out = []
        for s in w:
            sg, ns = _t_symbol(s, power)
            sign *= sg
            out.append(ns)
        return sign, tuple(out)

    return e.map_words(f)


def apply_shift(e: AlgElement, power: int = 1) -> AlgElement:
    """Unsigned index shift x_n^+ -> x_{n+p}^+, x_n^- -> x_{n-p}^-; equals (-1)^deg T^-p."""

    def f(w):
        out = []
        for s in w:
            if s.kind == "x+":
                out.append(GenSymbol("x+", s.idx + power, s.r))
            elif s.kind == "x-":
                out.append(GenSymbol("x-", s.idx - power, s.r))
            elif s.kind in ("psi+", "psi-", "h", "k", "P", "kb"):
                out.append(s)
            else:
                raise UnsupportedSymbol(f"no shift image for {s}")
        return 1, tuple(out)

    return e.map_words(f)


def _omega_symbol(s: GenSymbol) -> GenSymbol:
    k = s.kind
    if k == "x+":
        return GenSymbol("x-", -s.idx, s.r)
    if k == "x-":
        return GenSymbol("x+", -s.idx, s.r)
    if k == "psi+":
        return GenSymbol("psi-", -s.idx)
    if k == "psi-":
        return GenSymbol("psi+", -s.idx)
    if k == "h":
        return GenSymbol("h", -s.idx)
    if k == "k":
        return GenSymbol("k", -s.idx)
    if k == "P":
        return GenSymbol("P", -s.idx)
    if k == "kb":
        return s
    if k == "e0+":
        return GenSymbol("e0-", 0, s.r)
    if k == "e0-":
        return GenSymbol("e0+", 0, s.r)
    raise UnsupportedSymbol(str(s))


def apply_Omega(e: AlgElement) -> AlgElement:
    return e.map_words(lambda w: (1, tuple(_omega_symbol(s) for s in reversed(w))),
                       coeff_map=lambda c: c.bar())


def _phi_symbol(s: GenSymbol) -> GenSymbol:
    k = s.kind
    if k == "x+":
        return GenSymbol("x-", s.idx, s.r)
    if k == "x-":
        return GenSymbol("x+", s.idx, s.r)
    if k == "e0+":
        return GenSymbol("e0-", 0, s.r)
    if k == "e0-":
        return GenSymbol("e0+", 0, s.r)
    return s


def apply_Phi(e: AlgElement) -> AlgElement:
    return e.map_words(lambda w: (1, tuple(_phi_symbol(s) for s in reversed(w))))


# ---------------------------------------------------------------- builders

def _q(e: int = 1) -> RationalFunction:
    return RationalFunction.q(e)


def _rf(x) -> RationalFunction:
    return RationalFunction(x)


def X(s: GenSymbol, coeff=1) -> AlgElement:
    return AlgElement.sym(s, coeff)


ROUTES_P = ("psi_recursion", "h_recursion", "exp_formula")


def build_P(n: int, route: str = "h_recursion", specialized_l: int | None = None) -> AlgElement:
    if route not in ROUTES_P:
        raise ValueError(f"unknown route {route!r}")
    if route == "psi_recursion" and specialized_l:
        raise ValueError("the psi recursion divides by 1 - q^(-2n) and cannot run on "
                         "coefficients specialized at a root of unity")
    if n < 0:
        return apply_Omega(build_P(-n, route))
    return _build_P(n, route)


@lru_cache(maxsize=None)
def _build_P(n: int, route: str) -> AlgElement:
    if n == 0:
        return AlgElement.one()
    if route == "psi_recursion":
        acc = AlgElement()
        for r in range(1, n + 1):
            acc = acc + X(GenSymbol("psi+", r)) * _build_P(n - r, route)
        coeff = _rf(-1) / (1 - _q(-2 * n))
        return (X(kk(-1)) * acc).scale(coeff)
    if route == "h_recursion":
        acc = AlgElement()
        for r in range(1, n + 1):
            c = _q(r) * r / _rf(qint(r))
            acc = acc + (X(GenSymbol("h", r)) * _build_P(n - r, route)).scale(c)
        return acc.scale(Fraction(-1, n))
    # exp formula: sum over partitions k_1 + 2k_2 + ... = n
    acc = AlgElement()
    for ks in _partitions_by_mult(n):
        term = AlgElement.one()
        denom = 1
        for r, kr in enumerate(ks, start=1):
            if kr:
                denom *= factorial(kr)
                base = X(GenSymbol("h", r)).scale(_rf(-1) / _rf(qint(r)))
                term = term * base ** kr
        acc = acc + term.scale(Fraction(1, denom))
    return acc.scale(_q(n))


def _partitions_by_mult(n: int):
    """Yield tuples (k_1..k_n) with sum r k_r = n."""

    def rec(r, remaining):
        if r > n:
            if remaining == 0:
                yield ()
            return
        for k in range(remaining // r + 1):
            for rest in rec(r + 1, remaining - k * r):
                yield (k,) + rest

    yield from rec(1, n)


def compositions(n: int, r: int):
    """Ordered r-tuples of non-negative integers summing to n."""
    if r == 0:
        if n == 0:
            yield ()
        return
    for first in range(n + 1):
        for rest in compositions(n - first, r - 1):
            yield (first,) + rest


ROUTES_DPLUS = ("series", "recursion", "young")


def build_D_plus(n: int, r: int, route: str = "series") -> AlgElement:
    if route not in ROUTES_DPLUS:
        raise ValueError(f"unknown route {route!r}")
    if n < 0 or r < 0:
        return AlgElement()
    if route == "series":
        return _dplus_series(n, r)
    if route == "recursion":
        return _dplus_recursion(n, r)
    return _dplus_young(n, r)


@lru_cache(maxsize=None)
def _dplus_series(n: int, r: int) -> AlgElement:
    if r == 0:
        return AlgElement.one() if n == 0 else AlgElement()
    terms = {tuple(xp(m) for m in comp): 1 for comp in compositions(n, r)}
    return AlgElement(terms).scale(_rf(1) / _rf(qfact(r)))


@lru_cache(maxsize=None)
def _dplus_recursion(n: int, r: int) -> AlgElement:
    if r == 0:
        return AlgElement.one() if n == 0 else AlgElement()
    if r == 1:
        return X(xp(n))
    if n == 0:
        return X(xp(0, r))
    acc = AlgElement()
    for s in range(1, r):
        c = (-1) ** (s + 1) * _q(s * (r - 1))
        acc = acc + (X(xp(0, s)) * _dplus_recursion(n, r - s)).scale(c)
    if r <= n:
        acc = acc + apply_shift(_dplus_recursion(n - r, r), 1).scale(_q(r * (r - 1)))
    return acc


def dplus_recursion_literal(n: int, r: int) -> AlgElement:
    """The recursion read with the signed automorphism T; kept to document that it fails."""
    if r == 0:
        return AlgElement.one() if n == 0 else AlgElement()
    if r == 1:
        return X(xp(n))
    if n == 0:
        return X(xp(0, r))
    acc = AlgElement()
    for s in range(1, r):
        c = (-1) ** (s + 1) * _q(s * (r - 1))
        acc = acc + (X(xp(0, s)) * dplus_recursion_literal(n, r - s)).scale(c)
    if r <= n:
        acc = acc + apply_T(dplus_recursion_literal(n - r, r), 1).scale(_q(r * (r - 1)))
    return acc


def young_stats(pi) -> tuple[int, int]:
    """(number of rows, sum of products of adjacent column lengths)."""
    pi = list(pi)
    while pi and pi[-1] == 0:
        pi.pop()
    if any(x < 0 for x in pi):
        raise ValueError("multiplicities must be non-negative")
    l = sum(pi)
    cols = [sum(pi[j:]) for j in range(len(pi))]
    f = sum(a * b for a, b in zip(cols, cols[1:]))
    return l, f


def young_sequences(n: int, max_rows: int):
    """Sequences (r_1, r_2, ...) with sum i r_i = n and sum r_i <= max_rows."""

    def rec(i, remaining, rows):
        if remaining == 0:
            yield ()
            return
        if i > remaining:
            return
        for k in range(min(remaining // i, max_rows - rows) + 1):
            for rest in rec(i + 1, remaining - k * i, rows + k):
                yield (k,) + rest

    yield from rec(1, n, 0)


@lru_cache(maxsize=None)
def _dplus_young(n: int, r: int) -> AlgElement:
    if r == 0:
        return AlgElement.one() if n == 0 else AlgElement()
    acc = AlgElement()
    for pi in young_sequences(n, r):
        l, f = young_stats(pi)
        word = []
        if r - l:
            word.append(xp(0, r - l))
        for i, ri in enumerate(pi, start=1):
            if ri:
                word.append(xp(i, ri))
        acc = acc + AlgElement({tuple(word): _q(f + r * l - n)})
    return acc


ROUTES_DMINUS = ("series", "tphi")


def build_D_minus(n: int, r: int, route: str = "series") -> AlgElement:
    if route not in ROUTES_DMINUS:
        raise ValueError(f"unknown route {route!r}")
    if n < 0 or r < 0:
        return AlgElement()
    if route == "series":
        return _dminus_series(n, r)
    return apply_T(apply_Phi(_dplus_series(n, r)), 1).scale((-1) ** r)


@lru_cache(maxsize=None)
def _dminus_series(n: int, r: int) -> AlgElement:
    if r == 0:
        return AlgElement.one() if n == 0 else AlgElement()
    terms = {tuple(xm(m + 1) for m in comp): 1 for comp in compositions(n, r)}
    return AlgElement(terms).scale(_rf(1) / _rf(qfact(r)))


def build_Dbb(n: int, r: int, dplus_route: str = "series") -> AlgElement:
    """Sum_m P_m D^+_{n-m}(xi^(r)), with P_m kept as symbols."""
    acc = AlgElement()
    for m in range(n + 1):
        acc = acc + X(GenSymbol("P", m)) * build_D_plus(n - m, r, dplus_route)
    return acc


@lru_cache(maxsize=None)
def build_A(r: int, n: int) -> AlgElement:
    if r == 0:
        return X(xp(n))
    prev = build_A(r - 1, n)
    return prev * X(xp(0)) - (X(xp(0)) * prev).scale(_q(2 * r))


@lru_cache(maxsize=None)
def build_B(r: int, n: int) -> AlgElement:
    acc = AlgElement()
    for s in range(r + 1):
        acc = acc + AlgElement.word([xp(0)] * s + [xp(n)] + [xp(0)] * (r - s))
    return acc


def series_coefficient(factors, n: int) -> AlgElement:
    """u^n coefficient of a product of series; each factor maps m -> AlgElement (u^m coefficient)."""
    acc = AlgElement()
    for comp in compositions(n, len(factors)):
        term = AlgElement.one()
        for f, m in zip(factors, comp):
            t = f(m)
            if not t:
                term = AlgElement()
                break
            term = term * t
        acc = acc + term
    return acc


def xplus_series(scale_power: int = 0):
    """Coefficient map for X^+(q^s u): m -> q^{s m} x_m^+."""
    return lambda m: X(xp(m), _q(scale_power * m))
