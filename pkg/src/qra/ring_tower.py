"""Exact scalars: Laurent polynomials and rational functions in q, a
multivariate extension with evaluation parameters, and cyclotomic fields.

Heavy univariate/multivariate kernels are delegated to python-flint; the
q-arithmetic, normal forms and specialization logic live here.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

import flint

__all__ = [
    "PoleAtRoot", "ParseError", "LaurentPoly", "RationalFunction", "MultiPoly",
    "CyclotomicNumber", "qint", "qfact", "qbinom", "qbinom_general",
    "cyclotomic_poly", "specialize_at_root", "bar_involution", "parse_expr",
    "parse_laurent", "parse_rational", "parse_cyclotomic", "parse_multi", "PARAM_NAMES",
    "Ring", "QQ", "QQq", "PARAM", "cyc_ring", "format_terms",
]


class PoleAtRoot(ArithmeticError):
    """A denominator vanishes at the requested root of unity."""


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------- helpers

def _fq(c) -> flint.fmpq:
    if isinstance(c, flint.fmpq):
        return c
    if isinstance(c, int):
        return flint.fmpq(c)
    c = Fraction(c)
    return flint.fmpq(c.numerator, c.denominator)


def _frac(c) -> Fraction:
    return Fraction(int(c.p), int(c.q))


_ZERO_POLY = flint.fmpq_poly([])
_ONE_POLY = flint.fmpq_poly([1])


def _strip(p: flint.fmpq_poly) -> tuple[int, flint.fmpq_poly]:
    """Split p = x^k * p' with p'(0) != 0 (p nonzero)."""
    k = 0
    while p[k] == 0:
        k += 1
    return k, (p.right_shift(k) if k else p)


def _reverse(p: flint.fmpq_poly) -> flint.fmpq_poly:
    return flint.fmpq_poly(list(reversed(p.coeffs())))


def _poly_key(p: flint.fmpq_poly) -> tuple:
    return tuple((int(c.p), int(c.q)) for c in p.coeffs())


def _fmt_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_mono(var: str, e: int) -> str:
    if e == 1:
        return var
    return f"{var}^{e}"


def format_terms(terms: Iterable[tuple[Fraction, str]]) -> str:
    """Join (coefficient, monomial text) pairs into `1 - 3/2*q^-2 + q^4` form."""
    out = []
    for c, mono in terms:
        if c == 0:
            continue
        neg = c < 0
        a = -c if neg else c
        if not mono:
            body = _fmt_coef(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_fmt_coef(a)}*{mono}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out) if out else "0"


# ---------------------------------------------------------------- Laurent

class LaurentPoly:
    """Element of Q[q, q^-1], stored as q^val * poly with poly(0) != 0."""

    __slots__ = ("val", "poly")

    def __init__(self, coeffs: dict | int | Fraction | None = None):
        if coeffs is None:
            coeffs = {}
        elif not isinstance(coeffs, dict):
            coeffs = {0: coeffs}
        coeffs = {e: c for e, c in coeffs.items() if c != 0}
        if not coeffs:
            self.val, self.poly = 0, _ZERO_POLY
            return
        lo = min(coeffs)
        hi = max(coeffs)
        lst = [0] * (hi - lo + 1)
        for e, c in coeffs.items():
            lst[e - lo] = _fq(c)
        self.val, self.poly = lo, flint.fmpq_poly(lst)

    @classmethod
    def _make(cls, val: int, poly: flint.fmpq_poly) -> "LaurentPoly":
        obj = cls.__new__(cls)
        if poly == 0:
            obj.val, obj.poly = 0, _ZERO_POLY
        else:
            k, p = _strip(poly)
            obj.val, obj.poly = val + k, p
        return obj

    @classmethod
    def q(cls, e: int = 1) -> "LaurentPoly":
        return cls._make(e, _ONE_POLY)

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return {self.val + i: _frac(c) for i, c in enumerate(self.poly.coeffs()) if c != 0}

    def is_zero(self) -> bool:
        return self.poly == 0

    def __bool__(self) -> bool:
        return self.poly != 0

    def degree_range(self) -> tuple[int, int]:
        return self.val, self.val + self.poly.degree()

    def _co(self, other):
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly(other)
        return NotImplemented

    def __add__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        if not self:
            return other
        if not other:
            return self
        m = min(self.val, other.val)
        p = self.poly.left_shift(self.val - m) + other.poly.left_shift(other.val - m)
        return LaurentPoly._make(m, p)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._make(self.val, -self.poly)

    def __sub__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return LaurentPoly._make(self.val, self.poly * _fq(other))
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return LaurentPoly._make(self.val + other.val, self.poly * other.poly)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if self.poly.degree() != 0:
                raise ValueError("negative power of a non-monomial Laurent polynomial")
            return LaurentPoly._make(-self.val * -n, _ONE_POLY * (1 / self.poly[0]) ** (-n))
        out = LaurentPoly(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return LaurentPoly._make(self.val, self.poly / _fq(other))
        if isinstance(other, LaurentPoly):
            return self.exact_div(other)
        return NotImplemented

    def exact_div(self, other: "LaurentPoly") -> "LaurentPoly":
        if not other:
            raise ZeroDivisionError
        quo, rem = divmod(self.poly, other.poly)
        if rem != 0:
            raise ValueError("division is not exact")
        return LaurentPoly._make(self.val - other.val, quo)

    def bar(self) -> "LaurentPoly":
        if not self:
            return self
        return LaurentPoly._make(-self.val - self.poly.degree(), _reverse(self.poly))

    def __eq__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return self.val == other.val and self.poly == other.poly

    def __hash__(self):
        return hash(("L", self.val, _poly_key(self.poly)))

    def __call__(self, x):
        """Evaluate at x (any ring element supporting +, * and inverse powers)."""
        total = 0
        for e, c in sorted(self.coeffs.items()):
            total = total + c * x ** e
        return total

    def to_str(self, var: str = "q") -> str:
        return format_terms((c, _fmt_mono(var, e) if e else "") for e, c in sorted(self.coeffs.items()))

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"LaurentPoly({self})"


# ---------------------------------------------------------------- Q(q)

class RationalFunction:
    """Element q^val * num / den of Q(q) in canonical reduced form.

    num(0) != 0, den(0) != 0, den monic, gcd(num, den) = 1.
    """

    __slots__ = ("val", "num", "den")

    def __init__(self, num=0, den=None):
        if isinstance(num, RationalFunction) and den is None:
            self.val, self.num, self.den = num.val, num.num, num.den
            return
        n = _as_laurent(num)
        if den is None:
            self.val, self.num, self.den = n.val, n.poly, _ONE_POLY
            return
        d = _as_laurent(den)
        if not d:
            raise ZeroDivisionError("zero denominator")
        r = RationalFunction._make(n.val - d.val, n.poly, d.poly)
        self.val, self.num, self.den = r.val, r.num, r.den

    @classmethod
    def _make(cls, val: int, num: flint.fmpq_poly, den: flint.fmpq_poly) -> "RationalFunction":
        obj = cls.__new__(cls)
        if num == 0:
            obj.val, obj.num, obj.den = 0, _ZERO_POLY, _ONE_POLY
            return obj
        k, num = _strip(num)
        val += k
        if den.degree() > 0:
            j, den = _strip(den)
            val -= j
            g = num.gcd(den)
            if g.degree() > 0:
                num = divmod(num, g)[0]
                den = divmod(den, g)[0]
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        obj.val, obj.num, obj.den = val, num, den
        return obj

    @classmethod
    def q(cls, e: int = 1) -> "RationalFunction":
        return cls._make(e, _ONE_POLY, _ONE_POLY)

    @property
    def numerator(self) -> LaurentPoly:
        return LaurentPoly._make(self.val, self.num)

    @property
    def denominator(self) -> LaurentPoly:
        return LaurentPoly._make(0, self.den)

    def is_laurent(self) -> bool:
        return self.den.degree() == 0

    def to_laurent(self) -> LaurentPoly:
        if not self.is_laurent():
            raise ValueError("not a Laurent polynomial")
        return LaurentPoly._make(self.val, self.num)

    def is_zero(self) -> bool:
        return self.num == 0

    def __bool__(self):
        return self.num != 0

    def _co(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (int, Fraction, LaurentPoly)):
            return RationalFunction(other)
        return NotImplemented

    def __add__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.num:
            return other
        if not other.num:
            return self
        m = min(self.val, other.val)
        a = self.num.left_shift(self.val - m)
        b = other.num.left_shift(other.val - m)
        if self.den == other.den:
            if self.den.degree() == 0:
                return RationalFunction._make(m, a + b, _ONE_POLY)
            return RationalFunction._make(m, a + b, self.den)
        return RationalFunction._make(m, a * other.den + b * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        obj = RationalFunction.__new__(RationalFunction)
        obj.val, obj.num, obj.den = self.val, -self.num, self.den
        return obj

    def __sub__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return RationalFunction()
            obj = RationalFunction.__new__(RationalFunction)
            obj.val, obj.num, obj.den = self.val, self.num * _fq(other), self.den
            return obj
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.num or not other.num:
            return RationalFunction()
        if self.den.degree() == 0 and other.den.degree() == 0:
            obj = RationalFunction.__new__(RationalFunction)
            obj.val, obj.num, obj.den = self.val + other.val, self.num * other.num, _ONE_POLY
            return obj
        return RationalFunction._make(self.val + other.val, self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if not self.num:
            raise ZeroDivisionError("inverse of zero")
        return RationalFunction._make(-self.val, self.den, self.num)

    def __truediv__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = RationalFunction(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def bar(self) -> "RationalFunction":
        if not self.num:
            return self
        val = -self.val - self.num.degree() + self.den.degree()
        return RationalFunction._make(val, _reverse(self.num), _reverse(self.den))

    def __eq__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return self.val == other.val and self.num == other.num and self.den == other.den

    def __hash__(self):
        if self.den.degree() == 0:
            return hash(("L", self.val, _poly_key(self.num)))
        return hash(("R", self.val, _poly_key(self.num), _poly_key(self.den)))

    def has_pole_at(self, l: int) -> bool:
        return self.den.degree() > 0 and self.den % _phi(l) == 0

    def specialize(self, l: int) -> "CyclotomicNumber":
        return specialize_at_root(self, l)

    def __str__(self):
        n = self.numerator.to_str()
        if self.den.degree() == 0:
            return n
        return f"({n})/({self.denominator.to_str()})"

    def __repr__(self):
        return f"RationalFunction({self})"


def _as_laurent(x) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return LaurentPoly(x)
    if isinstance(x, RationalFunction) and x.is_laurent():
        return x.to_laurent()
    raise TypeError(f"cannot read {x!r} as a Laurent polynomial")


# ---------------------------------------------------------------- cyclotomic

def cyclotomic_poly(l: int) -> list[int]:
    """Integer coefficients (ascending) of the l-th cyclotomic polynomial."""
    return [int(c.p) for c in _phi(l).coeffs()]


@lru_cache(maxsize=None)
def _phi(l: int) -> flint.fmpq_poly:
    if l < 1:
        raise ValueError("cyclotomic order must be >= 1")
    p = flint.fmpq_poly([-1] + [0] * (l - 1) + [1])
    for d in range(1, l):
        if l % d == 0:
            quo, rem = divmod(p, _phi(d))
            assert rem == 0
            p = quo
    return p


@lru_cache(maxsize=None)
def _xpow_mod(l: int, k: int) -> flint.fmpq_poly:
    k %= l
    return flint.fmpq_poly([0] * k + [1]) % _phi(l)


class CyclotomicNumber:
    """Element of Q(eps) = Q[x]/Phi_l(x); x stands for a fixed primitive root eps."""

    __slots__ = ("l", "poly")

    def __init__(self, l: int, value=0):
        self.l = l
        if isinstance(value, flint.fmpq_poly):
            self.poly = value % _phi(l)
        elif isinstance(value, CyclotomicNumber):
            self.poly = value.poly
        else:
            self.poly = flint.fmpq_poly([_fq(value)]) if value != 0 else _ZERO_POLY

    @classmethod
    def _raw(cls, l: int, poly: flint.fmpq_poly) -> "CyclotomicNumber":
        obj = cls.__new__(cls)
        obj.l, obj.poly = l, poly
        return obj

    @classmethod
    def eps(cls, l: int, k: int = 1) -> "CyclotomicNumber":
        return cls._raw(l, _xpow_mod(l, k))

    @property
    def residue(self) -> list[Fraction]:
        return [_frac(c) for c in self.poly.coeffs()]

    @property
    def modulus_order(self) -> int:
        return self.l

    def is_zero(self):
        return self.poly == 0

    def __bool__(self):
        return self.poly != 0

    def is_rational(self) -> bool:
        return self.poly.degree() <= 0

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational number")
        return _frac(self.poly[0])

    def _co(self, other):
        if isinstance(other, CyclotomicNumber):
            if other.l != self.l:
                raise ValueError("mixing different cyclotomic fields")
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber(self.l, other)
        return NotImplemented

    def __add__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return CyclotomicNumber._raw(self.l, self.poly + other.poly)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber._raw(self.l, -self.poly)

    def __sub__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return CyclotomicNumber._raw(self.l, self.poly - other.poly)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber._raw(self.l, self.poly * _fq(other))
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        if self.poly.degree() <= 0 or other.poly.degree() <= 0:
            return CyclotomicNumber._raw(self.l, self.poly * other.poly)
        return CyclotomicNumber._raw(self.l, (self.poly * other.poly) % _phi(self.l))

    __rmul__ = __mul__

    def inverse(self) -> "CyclotomicNumber":
        if not self.poly:
            raise ZeroDivisionError("inverse of zero in Q(eps)")
        g, s, _ = self.poly.xgcd(_phi(self.l))
        return CyclotomicNumber._raw(self.l, (s / g[0]) % _phi(self.l))

    def __truediv__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = CyclotomicNumber(self.l, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "CyclotomicNumber":
        """Image under eps -> eps^-1."""
        out = CyclotomicNumber(self.l)
        for i, c in enumerate(self.poly.coeffs()):
            if c != 0:
                out = out + CyclotomicNumber.eps(self.l, -i) * _frac(c)
        return out

    def __eq__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return self.l == other.l and self.poly == other.poly

    def __hash__(self):
        if self.poly.degree() <= 0:
            return hash(_frac(self.poly[0]))
        return hash(("C", self.l, _poly_key(self.poly)))

    def __str__(self):
        return format_terms(
            (_frac(c), _fmt_mono("eps", i) if i else "") for i, c in enumerate(self.poly.coeffs())
        )

    def __repr__(self):
        return f"CyclotomicNumber({self.l}, {self})"

    def to_json(self) -> dict:
        return {"l": self.l, "poly": str(self)}

    @classmethod
    def from_json(cls, data: dict) -> "CyclotomicNumber":
        return parse_cyclotomic(data["poly"], int(data["l"]))


def specialize_at_root(f, l: int) -> CyclotomicNumber:
    """Evaluate f at q = eps, a primitive l-th root of unity."""
    if isinstance(f, (int, Fraction)):
        return CyclotomicNumber(l, f)
    if isinstance(f, LaurentPoly):
        f = RationalFunction(f)
    if isinstance(f, MultiPoly):
        f = f.to_rational()
    phi = _phi(l)
    num = (f.num % phi) * _xpow_mod(l, f.val) % phi
    if f.den.degree() == 0:
        return CyclotomicNumber._raw(l, num / f.den[0])
    den = f.den % phi
    if den == 0:
        raise PoleAtRoot(f"denominator {f.denominator} vanishes at a primitive root of unity of order {l}")
    return CyclotomicNumber._raw(l, num) / CyclotomicNumber._raw(l, den)


def bar_involution(f):
    """q -> q^-1."""
    if isinstance(f, (int, Fraction)):
        return f
    return f.bar()


# ---------------------------------------------------------------- q-numbers

@lru_cache(maxsize=None)
def qint(n: int) -> LaurentPoly:
    """Symmetric q-integer [n]_q."""
    if n < 0:
        return -qint(-n)
    return LaurentPoly({n - 1 - 2 * i: 1 for i in range(n)})


@lru_cache(maxsize=None)
def qfact(n: int) -> LaurentPoly:
    if n < 0:
        raise ValueError("qfact needs n >= 0")
    out = LaurentPoly(1)
    for i in range(2, n + 1):
        out = out * qint(i)
    return out


@lru_cache(maxsize=None)
def qbinom(n: int, r: int) -> LaurentPoly:
    if n < 0 or r < 0 or r > n:
        raise ValueError(f"qbinom needs 0 <= r <= n, got n={n}, r={r}")
    return qfact(n).exact_div(qfact(r) * qfact(n - r))


@lru_cache(maxsize=None)
def qbinom_general(n: int, r: int) -> LaurentPoly:
    """[n choose r]_q for any integer n and r >= 0 (zero for r < 0)."""
    if r < 0:
        return LaurentPoly()
    top = LaurentPoly(1)
    for s in range(1, r + 1):
        top = top * qint(n - s + 1)
    return top.exact_div(qfact(r))


# ---------------------------------------------------------------- parameters

PARAM_NAMES = ("a", "b", "c") + tuple(f"a{i}" for i in range(1, 9))
_VARS = ("q",) + PARAM_NAMES
_NV = len(_VARS)
_CTX = flint.fmpq_mpoly_ctx.get(_VARS)
_ZSHIFT = (0,) * _NV


@lru_cache(maxsize=4096)
def _lift_cached(key: tuple) -> flint.fmpq_mpoly:
    return _CTX.from_dict({(i,) + (0,) * (_NV - 1): flint.fmpq(p, q) for i, (p, q) in enumerate(key) if p})


def _lift(p: flint.fmpq_poly) -> flint.fmpq_mpoly:
    return _lift_cached(_poly_key(p))


def _mono(shift: tuple) -> flint.fmpq_mpoly:
    return _CTX.from_dict({shift: 1})


def _as_univariate(m: flint.fmpq_mpoly) -> flint.fmpq_poly | None:
    """Return m as a polynomial in q if no parameter occurs, else None."""
    d = m.to_dict()
    deg = 0
    for e in d:
        if any(e[1:]):
            return None
        deg = max(deg, e[0])
    lst = [0] * (deg + 1)
    for e, c in d.items():
        lst[e[0]] = c
    return flint.fmpq_poly(lst)


class MultiPoly:
    """Element of Q(q)[a^+-1, b^+-1, ...] stored as x^shift * num / den(q).

    The q-only denominator is reduced lazily; zero testing never needs it.
    """

    __slots__ = ("shift", "num", "den")

    def __init__(self, value=0):
        if isinstance(value, MultiPoly):
            self.shift, self.num, self.den = value.shift, value.num, value.den
            return
        if isinstance(value, (int, Fraction)):
            value = RationalFunction(value)
        elif isinstance(value, LaurentPoly):
            value = RationalFunction(value)
        if not isinstance(value, RationalFunction):
            raise TypeError(f"cannot coerce {value!r} to MultiPoly")
        if not value.num:
            self.shift, self.num, self.den = _ZSHIFT, _CTX.from_dict({}), _ONE_POLY
        else:
            self.shift = (value.val,) + (0,) * (_NV - 1)
            self.num, self.den = _lift(value.num), value.den

    @classmethod
    def _make(cls, shift, num, den, reduce: bool = False) -> "MultiPoly":
        obj = cls.__new__(cls)
        if num.is_zero():
            obj.shift, obj.num, obj.den = _ZSHIFT, num, _ONE_POLY
            return obj
        tc = num.term_content()
        e = tc.monoms()[0]
        if any(e):
            num = num / tc
            shift = tuple(a + b for a, b in zip(shift, e))
        if den.degree() > 0:
            j, den = _strip(den)
            if j:
                shift = (shift[0] - j,) + shift[1:]
            lc = den.leading_coefficient()
            if lc != 1:
                num = num * (1 / lc)
                den = den / lc
            if reduce:
                num, den = _reduce(num, den)
        obj.shift, obj.num, obj.den = shift, num, den
        return obj

    @classmethod
    def gen(cls, name: str, power: int = 1) -> "MultiPoly":
        i = _VARS.index(name)
        shift = tuple(power if j == i else 0 for j in range(_NV))
        return cls._make(shift, _CTX.from_dict({_ZSHIFT: 1}), _ONE_POLY)

    @classmethod
    def q(cls, e: int = 1) -> "MultiPoly":
        return cls.gen("q", e)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    @staticmethod
    def _co(other):
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, (int, Fraction, LaurentPoly, RationalFunction)):
            return MultiPoly(other)
        return NotImplemented

    def __add__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        m = tuple(min(a, b) for a, b in zip(self.shift, other.shift))
        a = self.num if self.shift == m else self.num * _mono(tuple(x - y for x, y in zip(self.shift, m)))
        b = other.num if other.shift == m else other.num * _mono(tuple(x - y for x, y in zip(other.shift, m)))
        if self.den == other.den:
            return MultiPoly._make(m, a + b, self.den)
        g = self.den.gcd(other.den)
        d1 = divmod(self.den, g)[0]
        d2 = divmod(other.den, g)[0]
        return MultiPoly._make(m, a * _lift(d2) + b * _lift(d1), self.den * d2)

    __radd__ = __add__

    def __neg__(self):
        obj = MultiPoly.__new__(MultiPoly)
        obj.shift, obj.num, obj.den = self.shift, -self.num, self.den
        return obj

    def __sub__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return MultiPoly()
            obj = MultiPoly.__new__(MultiPoly)
            obj.shift, obj.num, obj.den = self.shift, self.num * _fq(other), self.den
            return obj
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return MultiPoly()
        shift = tuple(a + b for a, b in zip(self.shift, other.shift))
        if self.den.degree() == 0 and other.den.degree() == 0:
            obj = MultiPoly.__new__(MultiPoly)
            obj.shift, obj.num, obj.den = shift, self.num * other.num, _ONE_POLY
            return obj
        return MultiPoly._make(shift, self.num * other.num, self.den * other.den, reduce=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            raise ZeroDivisionError
        n = _as_univariate(other.num)
        if n is None:
            raise NotImplementedError("division by a non-monomial expression in the parameters")
        shift = tuple(a - b for a, b in zip(self.shift, other.shift))
        num = self.num * _lift(other.den)
        if n.degree() == 0:
            return MultiPoly._make(shift, num * (1 / n[0]), self.den)
        quo, rem = divmod(num, _lift(n))
        if rem.is_zero():
            return MultiPoly._make(shift, quo, self.den)
        return MultiPoly._make(shift, num, self.den * n, reduce=True)

    def __rtruediv__(self, other):
        return MultiPoly(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return MultiPoly(1) / (self ** (-n))
        out = MultiPoly(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def reduced(self) -> "MultiPoly":
        if self.den.degree() == 0:
            return self
        num, den = _reduce(self.num, self.den)
        return MultiPoly._make(self.shift, num, den)

    def has_pole_at(self, l: int) -> bool:
        r = self.reduced()
        return r.den.degree() > 0 and r.den % _phi(l) == 0

    def bar(self) -> "MultiPoly":
        """q -> q^-1, parameters fixed."""
        out = MultiPoly()
        for e, c in self.num.to_dict().items():
            sh = tuple(a + b for a, b in zip(e, self.shift))
            out = out + MultiPoly._make((-sh[0],) + sh[1:], _CTX.from_dict({_ZSHIFT: c}), _ONE_POLY)
        den = RationalFunction._make(0, self.den, _ONE_POLY).bar()
        return out / den

    def variables(self) -> set[str]:
        return {_VARS[i] for e in self.num.monoms() for i in range(1, _NV) if e[i] or self.shift[i]}

    def evaluate(self, values: dict) -> "RationalFunction | CyclotomicNumber":
        """Substitute parameters by RationalFunction, rational or CyclotomicNumber values.

        With cyclotomic values the variable q is also specialized to eps.
        """
        cyc = next((v.l for v in values.values() if isinstance(v, CyclotomicNumber)), None)
        qv = CyclotomicNumber.eps(cyc) if cyc else RationalFunction.q()
        out = CyclotomicNumber(cyc) if cyc else RationalFunction()
        for e, c in self.num.to_dict().items():
            term = _frac(c)
            for i, k in enumerate(e):
                k = int(k) + self.shift[i]
                if not k:
                    continue
                if i == 0:
                    term = qv ** k * term
                else:
                    name = _VARS[i]
                    if name not in values:
                        raise KeyError(f"no value for parameter {name}")
                    v = values[name]
                    if isinstance(v, (int, Fraction)):
                        v = Fraction(v)
                    term = v ** k * term
            out = out + term
        den = RationalFunction._make(0, self.den, _ONE_POLY)
        if cyc:
            return out / specialize_at_root(den, cyc)
        return out / den

    def to_rational(self) -> RationalFunction:
        if any(self.shift[1:]) or _as_univariate(self.num) is None:
            raise ValueError("element still involves parameters")
        return RationalFunction._make(self.shift[0], _as_univariate(self.num), self.den)

    def __eq__(self, other):
        other = self._co(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).num.is_zero()

    def __hash__(self):
        raise TypeError("MultiPoly is not hashable")

    def __str__(self):
        if self.num.is_zero():
            return "0"
        mono = "*".join(_fmt_mono(v, e) for v, e in zip(_VARS, self.shift) if e)
        body = str(self.num) if not self.num.is_one() else ""
        s = "*".join(x for x in (mono, f"({body})" if body else "") if x) or "1"
        if self.den.degree() > 0:
            s += f"/({LaurentPoly._make(0, self.den)})"
        return s

    def __repr__(self):
        return f"MultiPoly({self})"


def _reduce(num: flint.fmpq_mpoly, den: flint.fmpq_poly):
    _, facs = den.factor()
    for f, e in facs:
        fl = _lift(f)
        while e:
            quo, rem = divmod(num, fl)
            if not rem.is_zero():
                break
            num = quo
            den = divmod(den, f)[0]
            e -= 1
    return num, den


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos} in {text!r}")
        out.append(m.group(m.lastindex))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def parse_expr(text: str, atoms: dict, const: Callable):
    """Evaluate an arithmetic expression over a ring.

    `atoms` maps names to ring elements, `const` maps a Fraction into the ring.
    Supports + - * / ^ (integer exponents), parentheses and implicit products
    such as `2u` or `(1-u)(1+u)`.
    """
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty expression")
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take():
        nonlocal pos
        if pos >= len(toks):
            raise ParseError(f"unexpected end of {text!r}")
        pos += 1
        return toks[pos - 1]

    def expr():
        v = term()
        while peek() in ("+", "-"):
            if take() == "+":
                v = v + term()
            else:
                v = v - term()
        return v

    def starts_atom(t):
        return t is not None and (t == "(" or t[0].isalnum() or t[0] == "_")

    def term():
        v = unary()
        while True:
            t = peek()
            if t == "*":
                take()
                v = v * unary()
            elif t == "/":
                take()
                v = v / unary()
            elif starts_atom(t):
                v = v * power()
            else:
                return v

    def unary():
        t = peek()
        if t == "-":
            take()
            return -unary()
        if t == "+":
            take()
            return unary()
        return power()

    def power():
        v = atom()
        if peek() in ("^", "**"):
            take()
            sign = 1
            while peek() in ("-", "+"):
                if take() == "-":
                    sign = -sign
            t = take()
            if t == "(":
                sign2 = 1
                while peek() in ("-", "+"):
                    if take() == "-":
                        sign2 = -sign2
                t = take()
                if take() != ")":
                    raise ParseError("bad exponent")
                sign *= sign2
            if not t.isdigit():
                raise ParseError(f"exponent must be an integer, got {t!r}")
            v = v ** (sign * int(t))
        return v

    def atom():
        t = take()
        if t == "(":
            v = expr()
            if take() != ")":
                raise ParseError("unbalanced parentheses")
            return v
        if t.isdigit():
            return const(Fraction(int(t)))
        if t in atoms:
            return atoms[t]
        raise ParseError(f"unknown symbol {t!r}")

    try:
        v = expr()
    except (ZeroDivisionError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from exc
    if pos != len(toks):
        raise ParseError(f"trailing input in {text!r}")
    return v


def parse_laurent(text: str) -> LaurentPoly:
    return parse_expr(text, {"q": LaurentPoly.q()}, LaurentPoly)


def parse_rational(text: str) -> RationalFunction:
    return parse_expr(text, {"q": RationalFunction.q()}, RationalFunction)


def parse_cyclotomic(text: str, l: int) -> CyclotomicNumber:
    e = CyclotomicNumber.eps(l)
    return parse_expr(text, {"eps": e, "q": e}, lambda c: CyclotomicNumber(l, c))


def parse_multi(text: str) -> MultiPoly:
    atoms = {v: MultiPoly.gen(v) for v in _VARS}
    return parse_expr(text, atoms, MultiPoly)


# ---------------------------------------------------------------- rings

class Ring:
    """Coefficient domain used by matrices: zero, one, coercion, specialization tag."""

    def __init__(self, name: str, coerce: Callable, l: int = 0, symbolic: bool = False):
        self.name = name
        self._coerce = coerce
        self.l = l
        self.symbolic = symbolic
        self.zero = coerce(0)
        self.one = coerce(1)

    def __call__(self, x):
        return self._coerce(x)

    @property
    def generic(self) -> bool:
        return self.l == 0

    def __repr__(self):
        return f"Ring({self.name})"


def _to_rf(x):
    if isinstance(x, RationalFunction):
        return x
    return RationalFunction(x)


def _to_mp(x):
    return x if isinstance(x, MultiPoly) else MultiPoly(x)


QQ = Ring("QQ", Fraction)
QQq = Ring("Q(q)", _to_rf)
PARAM = Ring("Q(q)[params]", _to_mp, symbolic=True)


@lru_cache(maxsize=None)
def cyc_ring(l: int) -> Ring:
    def co(x):
        if isinstance(x, CyclotomicNumber):
            return x
        if isinstance(x, (RationalFunction, LaurentPoly)):
            return specialize_at_root(x, l)
        return CyclotomicNumber(l, x)

    return Ring(f"Q(eps_{l})", co, l=l)
