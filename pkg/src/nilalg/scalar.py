"""Exact scalars: Gaussian rationals, rational functions in a parameter ``a``,
and finite t-expressions with fractional exponents and formal radicals.

All values are immutable.  Text forms::

    3/2+1/2i          GaussRat
    (a^2+1)/(a-1)     ParamRat
    t^(-1)+5*t        TExpr
    rad(1+t;5)        (1+t)^(1/5)
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

import mpmath

__all__ = [
    "GaussRat",
    "ParamRat",
    "Radical",
    "TExpr",
    "DIVERGES",
    "I",
    "ZERO",
    "ONE",
    "as_scalar",
    "limit_at_zero",
    "clear_fractional_powers",
    "eval_numeric",
    "rational_root",
]

MAX_PARAM_DEGREE = 16


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot make a rational from {x!r}")


def _fmt_frac(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rational_root(q: Fraction, m: int) -> Fraction | None:
    """Exact m-th root of a rational, or None.  Negative q only for odd m."""
    if q == 0:
        return Fraction(0)
    sign = 1
    if q < 0:
        if m % 2 == 0:
            return None
        sign, q = -1, -q
    num = _int_root(q.numerator, m)
    den = _int_root(q.denominator, m)
    if num is None or den is None:
        return None
    return sign * Fraction(num, den)


def _int_root(n: int, m: int) -> int | None:
    if n < 2:
        return n
    r = round(n ** (1.0 / m)) if n < 2**1000 else int(mpmath.root(n, m))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**m == n:
            return c
    # large inputs: integer Newton
    x = 1 << ((n.bit_length() + m - 1) // m)
    while True:
        y = ((m - 1) * x + n // x ** (m - 1)) // m
        if y >= x:
            break
        x = y
    return x if x**m == n else None


class GaussRat:
    """An element re + im*i of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussRat is immutable")

    def __reduce__(self):
        return (GaussRat, (self.re, self.im))

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> "GaussRat":
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    @classmethod
    def coerce(cls, x) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, (int, Fraction)):
            return cls._raw(Fraction(x), Fraction(0))
        if isinstance(x, complex):
            return cls(Fraction(x.real).limit_denominator(), Fraction(x.imag).limit_denominator())
        raise TypeError(f"cannot coerce {x!r} to GaussRat")

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, GaussRat):
            return GaussRat._raw(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return GaussRat._raw(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return GaussRat._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, GaussRat):
            return GaussRat._raw(self.re - other.re, self.im - other.im)
        if isinstance(other, (int, Fraction)):
            return GaussRat._raw(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussRat._raw(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, GaussRat):
            a, b, c, d = self.re, self.im, other.re, other.im
            if not b and not d:
                return GaussRat._raw(a * c, b)
            return GaussRat._raw(a * c - b * d, a * d + b * c)
        if isinstance(other, (int, Fraction)):
            return GaussRat._raw(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "GaussRat":
        a, b = self.re, self.im
        if not b:
            if not a:
                raise ZeroDivisionError("GaussRat division by zero")
            return GaussRat._raw(1 / a, b)
        n = a * a + b * b
        return GaussRat._raw(a / n, -b / n)

    def __truediv__(self, other):
        if isinstance(other, GaussRat):
            if not other.im:
                if not other.re:
                    raise ZeroDivisionError("GaussRat division by zero")
                return GaussRat._raw(self.re / other.re, self.im / other.re)
            return self * other.inverse()
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("GaussRat division by zero")
            return GaussRat._raw(self.re / other, self.im / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussRat.coerce(other) * self.inverse()
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int):
            if isinstance(k, Fraction) and k.denominator == 1:
                k = k.numerator
            else:
                return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # predicates -------------------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_zero(self) -> bool:
        return not self

    def is_real(self) -> bool:
        return not self.im

    def __eq__(self, other):
        if isinstance(other, GaussRat):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def conjugate(self) -> "GaussRat":
        return GaussRat._raw(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # roots --------------------------------------------------------------
    def sqrt(self) -> "GaussRat | None":
        """Principal square root in Q(i), or None when it is not in Q(i)."""
        a, b = self.re, self.im
        if not b:
            if a >= 0:
                r = rational_root(a, 2)
                return None if r is None else GaussRat._raw(r, Fraction(0))
            r = rational_root(-a, 2)
            return None if r is None else GaussRat._raw(Fraction(0), r)
        modulus = rational_root(a * a + b * b, 2)
        if modulus is None:
            return None
        x = rational_root((a + modulus) / 2, 2)
        if x is None or x == 0:
            return None
        return GaussRat._raw(x, b / (2 * x))

    def root(self, m: int) -> "GaussRat | None":
        """Principal m-th root if it lies in Q(i)."""
        if m == 1:
            return self
        if m == 2:
            return self.sqrt()
        if not self:
            return ZERO
        if not self.im and self.re > 0:
            r = rational_root(self.re, m)
            return None if r is None else GaussRat._raw(r, Fraction(0))
        if m % 2 == 0:
            half = self.root(m // 2)
            return None if half is None else half.sqrt()
        # odd m: try the exact candidate suggested by the numeric principal root
        approx = mpmath.root(self.to_mpc(), m)
        cand = GaussRat(Fraction(float(approx.real)).limit_denominator(10**6),
                        Fraction(float(approx.imag)).limit_denominator(10**6))
        return cand if cand**m == self else None

    # conversions --------------------------------------------------------
    def to_mpc(self):
        return mpmath.mpc(mpmath.mpf(self.re.numerator) / self.re.denominator,
                          mpmath.mpf(self.im.numerator) / self.im.denominator)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if not self.im:
            return _fmt_frac(self.re)
        if self.im == 1:
            im = "i"
        elif self.im == -1:
            im = "-i"
        else:
            im = _fmt_frac(self.im) + "i"
        if not self.re:
            return im
        sep = "" if im.startswith("-") else "+"
        return f"{_fmt_frac(self.re)}{sep}{im}"

    def __repr__(self):
        return f"GaussRat({self})"

    def is_compound(self) -> bool:
        return bool(self.re) and bool(self.im)

    @classmethod
    def parse(cls, text: str) -> "GaussRat":
        from .parsing import evaluate_text

        value = evaluate_text(text, {})
        if not isinstance(value, GaussRat):
            raise ValueError(f"{text!r} is not a Gaussian rational")
        return value


ZERO = GaussRat(0)
ONE = GaussRat(1)
I = GaussRat(0, 1)


def as_scalar(x):
    """Coerce python numbers to GaussRat; leave other scalar types alone."""
    if isinstance(x, (int, Fraction, complex)):
        return GaussRat.coerce(x)
    return x


# ---------------------------------------------------------------------------
# univariate polynomials over Q(i) (tuples of coefficients, low degree first)


def _ptrim(p):
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return tuple(p)


def _padd(p, q):
    n = max(len(p), len(q))
    return _ptrim((p[k] if k < len(p) else ZERO) + (q[k] if k < len(q) else ZERO) for k in range(n))


def _pneg(p):
    return tuple(-c for c in p)


def _pmul(p, q):
    if not p or not q:
        return ()
    out = [ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            if b:
                out[i + j] = out[i + j] + a * b
    return _ptrim(out)


def _pdivmod(p, q):
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    p = list(p)
    quo = [ZERO] * max(len(p) - len(q) + 1, 0)
    lead = q[-1].inverse()
    while len(p) >= len(q) and p:
        shift = len(p) - len(q)
        coef = p[-1] * lead
        quo[shift] = coef
        for k, c in enumerate(q):
            p[shift + k] = p[shift + k] - coef * c
        p = list(_ptrim(p))
    return _ptrim(quo), tuple(p)


def _pgcd(p, q):
    while q:
        p, q = q, _pdivmod(p, q)[1]
    if not p:
        return p
    lead = p[-1].inverse()
    return tuple(c * lead for c in p)


def _peval(p, x):
    acc = ZERO if isinstance(x, GaussRat) else 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _peval_mp(p, x):
    acc = mpmath.mpc(0)
    for c in reversed(p):
        acc = acc * x + c.to_mpc()
    return acc


def _pfmt(p, var):
    terms = []
    for k in range(len(p) - 1, -1, -1):
        c = p[k]
        if not c:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        terms.append(_term_str(c, mono))
    return _join_terms(terms) if terms else "0"


def _term_str(c: GaussRat, mono: str) -> str:
    if not mono:
        return str(c)
    if c == 1:
        return mono
    if c == -1:
        return "-" + mono
    s = f"({c})" if c.is_compound() else str(c)
    return f"{s}*{mono}"


def _join_terms(terms):
    out = terms[0]
    for s in terms[1:]:
        out += s if s.startswith("-") else "+" + s
    return out


class ParamRat:
    """Rational function num(a)/den(a) over Q(i); den is monic, gcd(num, den) = 1."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(ONE,)):
        num = _ptrim(GaussRat.coerce(c) for c in num)
        den = _ptrim(GaussRat.coerce(c) for c in den)
        if not den:
            raise ZeroDivisionError("ParamRat with zero denominator")
        if not num:
            den = (ONE,)
        else:
            g = _pgcd(num, den)
            if len(g) > 1:
                num = _pdivmod(num, g)[0]
                den = _pdivmod(den, g)[0]
        lead = den[-1].inverse()
        num = tuple(c * lead for c in num)
        den = tuple(c * lead for c in den)
        if max(len(num), len(den)) - 1 > MAX_PARAM_DEGREE:
            raise OverflowError(f"ParamRat degree exceeds {MAX_PARAM_DEGREE}")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("ParamRat is immutable")

    def __reduce__(self):
        return (ParamRat, (self.num, self.den))

    @classmethod
    def variable(cls) -> "ParamRat":
        return cls((ZERO, ONE))

    @classmethod
    def const(cls, c) -> "ParamRat":
        return cls((GaussRat.coerce(c),))

    @staticmethod
    def _lift(x):
        if isinstance(x, ParamRat):
            return x
        if isinstance(x, (GaussRat, int, Fraction)):
            return ParamRat.const(x)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return ParamRat(_padd(_pmul(self.num, o.den), _pmul(o.num, self.den)), _pmul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        return ParamRat(_pneg(self.num), self.den)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return ParamRat(_pmul(self.num, o.num), _pmul(self.den, o.den))

    __rmul__ = __mul__

    def inverse(self) -> "ParamRat":
        if not self.num:
            raise ZeroDivisionError("ParamRat division by zero")
        return ParamRat(self.den, self.num)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k):
        if isinstance(k, Fraction) and k.denominator == 1:
            k = k.numerator
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        return reduce(lambda x, y: x * y, [self] * k, ParamRat.const(1))

    def __bool__(self):
        return bool(self.num)

    def is_zero(self):
        return not self.num

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if len(self.den) == 1 and len(self.num) <= 1:
            return hash(self.num[0] if self.num else ZERO)
        return hash((self.num, self.den))

    def constant(self) -> GaussRat | None:
        if len(self.den) == 1 and len(self.num) <= 1:
            return self.num[0] if self.num else ZERO
        return None

    def __call__(self, alpha):
        """Evaluate at a concrete parameter value (GaussRat or mpmath number)."""
        if isinstance(alpha, GaussRat) or isinstance(alpha, (int, Fraction)):
            alpha = GaussRat.coerce(alpha)
            d = _peval(self.den, alpha)
            if not d:
                raise ZeroDivisionError(f"denominator of {self} vanishes at a={alpha}")
            return _peval(self.num, alpha) / d
        d = _peval_mp(self.den, alpha)
        if d == 0:
            raise ZeroDivisionError(f"denominator of {self} vanishes at a={alpha}")
        return _peval_mp(self.num, alpha) / d

    evaluate = __call__

    def to_mpc(self):
        c = self.constant()
        if c is None:
            raise ValueError("ParamRat still depends on the parameter")
        return c.to_mpc()

    def is_compound(self) -> bool:
        c = self.constant()
        return True if c is None else c.is_compound()

    def __str__(self):
        num = _pfmt(self.num, "a")
        if self.den == (ONE,):
            return num
        den = _pfmt(self.den, "a")
        if len([c for c in self.num if c]) > 1:
            num = f"({num})"
        if len([c for c in self.den if c]) > 1 or len(self.den) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"ParamRat({self})"


# ---------------------------------------------------------------------------
# t-expressions


class Radical:
    """The formal symbol f(t)^(1/m) with f a polynomial in t, f(0) != 0."""

    __slots__ = ("poly", "m")

    def __init__(self, poly, m: int):
        poly = _ptrim(GaussRat.coerce(c) for c in poly)
        if not poly or not poly[0]:
            raise ValueError("radicand must have a nonzero value at t = 0")
        if m < 2:
            raise ValueError("radical index must be at least 2")
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "m", int(m))

    def __setattr__(self, name, value):
        raise AttributeError("Radical is immutable")

    def __reduce__(self):
        return (Radical, (self.poly, self.m))

    def __eq__(self, other):
        return isinstance(other, Radical) and self.poly == other.poly and self.m == other.m

    def __hash__(self):
        return hash((self.poly, self.m))

    def __lt__(self, other):
        return str(self) < str(other)

    def value_at_zero(self) -> GaussRat | None:
        return self.poly[0].root(self.m)

    def eval_numeric(self, t0):
        return mpmath.root(_peval_mp(self.poly, t0), self.m)

    def __str__(self):
        return f"rad({_pfmt(self.poly, 't')};{self.m})"

    def __repr__(self):
        return f"Radical({self})"


def _fmt_exp(e: Fraction) -> str:
    if e.denominator == 1 and e > 0:
        return "" if e == 1 else f"^{e.numerator}"
    return f"^({_fmt_frac(e)})"


class _Diverges:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "DIVERGES"

    def __reduce__(self):
        return (_Diverges, ())

    __str__ = __repr__

    def __bool__(self):
        return True


DIVERGES = _Diverges()


class TExpr:
    """Finite sum of c * t^q * prod(rad_k^e_k).

    ``terms`` maps (q: Fraction, rads: tuple[(Radical, int), ...]) to a nonzero
    coefficient (GaussRat or ParamRat).
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for key, c in terms.items():
                c = as_scalar(c)
                if c:
                    clean[key] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("TExpr is immutable")

    def __reduce__(self):
        return (TExpr, (dict(self.terms),))

    @classmethod
    def _raw(cls, terms):
        obj = object.__new__(cls)
        object.__setattr__(obj, "terms", terms)
        return obj

    @classmethod
    def const(cls, c) -> "TExpr":
        return cls({(Fraction(0), ()): c})

    @classmethod
    def monomial(cls, c, q=1, rads=()) -> "TExpr":
        return cls({(Fraction(q), tuple(sorted(rads))): c})

    @classmethod
    def t(cls) -> "TExpr":
        return cls.monomial(ONE, 1)

    @classmethod
    def radical(cls, rad: Radical, e: int = 1) -> "TExpr":
        return cls.monomial(ONE, 0, ((rad, e),))

    @staticmethod
    def _lift(x):
        if isinstance(x, TExpr):
            return x
        if isinstance(x, (GaussRat, ParamRat, int, Fraction)):
            return TExpr.const(as_scalar(x))
        return None

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for key, c in o.terms.items():
            s = out.get(key)
            s = c if s is None else s + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return TExpr._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return TExpr._raw({k: -c for k, c in self.terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    @staticmethod
    def _merge_rads(r1, r2):
        if not r1:
            return r2
        if not r2:
            return r1
        acc = dict(r1)
        for rad, e in r2:
            acc[rad] = acc.get(rad, 0) + e
        return tuple(sorted((r, e) for r, e in acc.items() if e))

    def __mul__(self, other):
        if isinstance(other, (GaussRat, ParamRat, int, Fraction)):
            if not other:
                return TExpr._raw({})
            return TExpr._raw({k: c * other for k, c in self.terms.items()})
        if not isinstance(other, TExpr):
            return NotImplemented
        out = {}
        for (q1, r1), c1 in self.terms.items():
            for (q2, r2), c2 in other.terms.items():
                key = (q1 + q2, self._merge_rads(r1, r2))
                s = out.get(key)
                prod = c1 * c2
                s = prod if s is None else s + prod
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        if any(e >= rad.m for (_, rads) in out for rad, e in rads):
            return TExpr._reduce_radicals(out)
        return TExpr._raw(out)

    __rmul__ = __mul__

    @staticmethod
    def _reduce_radicals(terms):
        # rad^e with e >= m becomes rad^(e-m) * radicand
        acc = TExpr._raw({})
        for (q, rads), c in terms.items():
            term = TExpr._raw({(q, ()): c})
            for rad, e in rads:
                k, r = divmod(e, rad.m) if e > 0 else (0, e)
                if r:
                    term = term * TExpr._raw({(Fraction(0), ((rad, r),)): ONE})
                if k:
                    poly = TExpr._raw({(Fraction(d), ()): cf for d, cf in enumerate(rad.poly) if cf})
                    term = term * poly**k
            acc = acc + term
        return acc

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def inverse(self) -> "TExpr":
        if not self.is_monomial():
            raise ZeroDivisionError(f"cannot invert non-monomial t-expression {self}")
        (q, rads), c = next(iter(self.terms.items()))
        return TExpr._raw({(-q, tuple((r, -e) for r, e in rads)): 1 / c})

    def __truediv__(self, other):
        if isinstance(other, (GaussRat, ParamRat, int, Fraction)):
            return self * (1 / as_scalar(other))
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k):
        k = Fraction(k) if isinstance(k, int) else k
        if not isinstance(k, Fraction):
            return NotImplemented
        return self.power(k)

    def power(self, k: Fraction) -> "TExpr":
        k = Fraction(k)
        if k.denominator == 1:
            n = k.numerator
            if n < 0:
                return self.inverse().power(Fraction(-n))
            result, base = TExpr.const(ONE), self
            while n:
                if n & 1:
                    result = result * base
                base = base * base
                n >>= 1
            return result
        # fractional power
        if not self.terms:
            if k > 0:
                return self
            raise ZeroDivisionError("negative power of zero")
        if self.is_monomial():
            (q, rads), c = next(iter(self.terms.items()))
            if not rads:
                croot = _scalar_power(c, k)
                if croot is not None:
                    return TExpr._raw({(q * k, ()): croot})
        poly = self.polynomial()
        if poly is not None:
            # pull out the lowest power of t so the radicand has f(0) != 0
            low = next(i for i, c in enumerate(poly) if c)
            shifted = poly[low:]
            base = TExpr.monomial(ONE, Fraction(low) * k)
            if len(shifted) == 1:
                croot = _scalar_power(shifted[0], k)
                if croot is None:
                    raise ValueError(f"power {k} of {shifted[0]} is not in Q(i)")
                return base * croot
            rad = Radical(shifted, k.denominator)
            return base * TExpr.radical(rad, k.numerator)
        raise ValueError(f"unsupported fractional power {k} of {self}")

    def polynomial(self):
        """Coefficient tuple in t if this is a GaussRat polynomial in t, else None."""
        coeffs = {}
        for (q, rads), c in self.terms.items():
            if rads or q.denominator != 1 or q < 0 or not isinstance(c, GaussRat):
                return None
            coeffs[q.numerator] = c
        if not coeffs:
            return ()
        return tuple(coeffs.get(k, ZERO) for k in range(max(coeffs) + 1))

    # predicates -------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def constant(self):
        """The value if this expression does not depend on t, else None."""
        if not self.terms:
            return ZERO
        if len(self.terms) == 1:
            (q, rads), c = next(iter(self.terms.items()))
            if q == 0 and not rads:
                return c
        return None

    def has_radicals(self) -> bool:
        return any(rads for (_, rads) in self.terms)

    def exponent_denominators(self):
        return {q.denominator for (q, _) in self.terms}

    def is_laurent(self) -> bool:
        return not self.has_radicals() and self.exponent_denominators() <= {1}

    def valuation(self):
        """Smallest t-exponent present (None for zero)."""
        if not self.terms:
            return None
        return min(q for (q, _) in self.terms)

    def leading(self):
        """(valuation, coefficient) of a radical-free expression."""
        v = self.valuation()
        if v is None:
            return None, ZERO
        c = ZERO
        for (q, rads), coef in self.terms.items():
            if q == v:
                if rads:
                    raise ValueError("leading term involves radicals")
                c = coef
        return v, c

    def substitute_power(self, n: int) -> "TExpr":
        """Replace t by s^n (s printed as t)."""
        return TExpr._raw({(q * n, rads): c for (q, rads), c in self.terms.items()})

    def map_coefficients(self, fn) -> "TExpr":
        return TExpr({k: fn(c) for k, c in self.terms.items()})

    def eval_numeric(self, t0, alpha=None):
        t0 = mpmath.mpmathify(t0)
        acc = mpmath.mpc(0)
        for (q, rads), c in self.terms.items():
            if isinstance(c, ParamRat):
                if c.constant() is None:
                    if alpha is None:
                        raise ValueError("expression depends on a; supply alpha")
                    cv = c(mpmath.mpmathify(alpha))
                else:
                    cv = c.constant().to_mpc()
            else:
                cv = c.to_mpc()
            term = cv * mpmath.power(t0, mpmath.mpf(q.numerator) / q.denominator)
            for rad, e in rads:
                term *= mpmath.power(rad.eval_numeric(t0), e)
            acc += term
        return acc

    # printing -----------------------------------------------------------
    def _sort_key(self, key):
        q, rads = key
        return (q, tuple((str(r), e) for r, e in rads))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms, key=self._sort_key):
            q, rads = key
            c = self.terms[key]
            factors = []
            if q:
                factors.append("t" + _fmt_exp(q))
            for rad, e in rads:
                factors.append(str(rad) + ("" if e == 1 else _fmt_exp(Fraction(e))))
            mono = "*".join(factors)
            if isinstance(c, ParamRat) and c.constant() is None:
                cs = f"({c})"
                parts.append(cs if not mono else f"{cs}*{mono}")
            else:
                c = c.constant() if isinstance(c, ParamRat) else c
                parts.append(_term_str(c, mono))
        return _join_terms(parts)

    def __repr__(self):
        return f"TExpr({self})"

    @classmethod
    def parse(cls, text: str) -> "TExpr":
        from .parsing import evaluate_text

        value = evaluate_text(text, {"t": cls.t(), "a": ParamRat.variable()})
        return cls._lift(value)


def _scalar_power(c, k: Fraction):
    if isinstance(c, ParamRat):
        const = c.constant()
        if const is None:
            return None
        c = const
    base = c.root(k.denominator)
    if base is None:
        return None
    return base**k.numerator


# ---------------------------------------------------------------------------
# operations


def _radical_series(rad: Radical, e: int, order: int):
    """Power series of rad^e up to t^(order-1): dict exponent -> GaussRat."""
    f0 = rad.poly[0]
    root0 = f0.root(rad.m)
    if root0 is None:
        raise ValueError(f"value of {rad} at t=0 is not in Q(i)")
    lead = root0**e
    # (1 + g)^(e/m) with g = f/f0 - 1
    g = [c / f0 for c in rad.poly]
    g = list(g) + [ZERO] * max(0, order - len(g))
    g[0] = ZERO
    g = g[:order]
    expo = Fraction(e, rad.m)
    result = [ZERO] * order
    result[0] = ONE
    gpow = [ONE] + [ZERO] * (order - 1)
    binom = Fraction(1)
    for j in range(1, order):
        gpow = [sum((gpow[a] * g[b] for a in range(order) for b in range(order)
                     if a + b == k and gpow[a] and g[b]), ZERO) for k in range(order)]
        binom = binom * (expo - j + 1) / j
        if not any(gpow):
            break
        for k in range(order):
            if gpow[k]:
                result[k] = result[k] + gpow[k] * binom
    return {Fraction(k): c * lead for k, c in enumerate(result) if c}


def _series(x: TExpr, order: int):
    """Expand radicals: exponent -> coefficient, valid below valuation + order."""
    out = {}
    for (q, rads), c in x.terms.items():
        part = {q: c}
        for rad, e in rads:
            ser = _radical_series(rad, e, order)
            nxt = {}
            for q1, c1 in part.items():
                for q2, c2 in ser.items():
                    nxt[q1 + q2] = nxt.get(q1 + q2, ZERO) + c1 * c2
            part = nxt
        for q1, c1 in part.items():
            out[q1] = out.get(q1, ZERO) + c1
    return {q: c for q, c in out.items() if c}


def limit_at_zero(x):
    """Exact limit as t -> 0+ of a t-expression (or a ratio (num, den))."""
    if isinstance(x, tuple):
        return _limit_ratio(*x)
    if not isinstance(x, TExpr):
        return as_scalar(x)
    if not x.terms:
        return ZERO
    if not x.has_radicals():
        v = x.valuation()
        if v > 0:
            return ZERO
        if v < 0:
            return DIVERGES
        return x.terms.get((Fraction(0), ()), ZERO)
    # radicals: expand as power series until the sign of the leading exponent is settled
    v0 = x.valuation()
    order = 4
    while order <= 64:
        ser = _series(x, order)
        horizon = v0 + order
        low = [q for q in ser if q < horizon]
        if low:
            q = min(low)
            if q > 0:
                return ZERO
            if q < 0:
                return DIVERGES
            return ser[q]
        if horizon > 0:
            return ZERO
        order *= 2
    raise ValueError("could not settle limit within series order 64")


def _limit_ratio(num: TExpr, den: TExpr):
    vn, cn = num.leading() if isinstance(num, TExpr) else (Fraction(0), as_scalar(num))
    vd, cd = den.leading() if isinstance(den, TExpr) else (Fraction(0), as_scalar(den))
    if vd is None:
        raise ZeroDivisionError("zero denominator")
    if vn is None:
        return ZERO
    if vn > vd:
        return ZERO
    if vn < vd:
        return DIVERGES
    return cn / cd


def clear_fractional_powers(matrix):
    """Substitute t = s^N so every exponent is integral.  Returns (matrix, N)."""
    dens = set()
    for row in matrix:
        for x in row:
            if isinstance(x, TExpr):
                dens |= x.exponent_denominators()
    n = reduce(math.lcm, dens, 1)
    out = [[x.substitute_power(n) if isinstance(x, TExpr) and n != 1 else x for x in row]
           for row in matrix]
    return out, n


def eval_numeric(x, t0, alpha=None, dps: int = 50):
    """Evaluate a scalar or t-expression at t = t0 with ``dps`` decimal digits."""
    with mpmath.workdps(dps):
        if isinstance(x, TExpr):
            return x.eval_numeric(t0, alpha)
        if isinstance(x, ParamRat):
            if alpha is None:
                return x.to_mpc()
            return x(mpmath.mpmathify(alpha))
        return as_scalar(x).to_mpc()
