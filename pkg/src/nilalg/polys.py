"""Sparse multivariate polynomials over Q(i) and a randomized exact solver.

The solver is aimed at systems with a large solution set (orbit and
stabilizer equations): it eliminates variables that occur affinely with a
constant coefficient, solves univariate quadratics when the roots are
Gaussian rationals, and otherwise pins a variable to a random small value.
"""
from __future__ import annotations

import random
from fractions import Fraction

import mpmath

from .scalar import GaussRat, ZERO, ONE

__all__ = ["Poly", "solve_system"]


class Poly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: GaussRat.coerce(c)})

    @classmethod
    def var(cls, nvars, k):
        m = [0] * nvars
        m[k] = 1
        return cls(nvars, {tuple(m): ONE})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.nvars, other)
        return self.terms == other.terms

    __hash__ = None

    def _lift(self, other):
        return other if isinstance(other, Poly) else Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = GaussRat.coerce(other)
            return Poly(self.nvars, {m: x * c for m, x in self.terms.items()}) if c else Poly(self.nvars)
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out[m] + c1 * c2 if m in out else c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def variables(self):
        return {k for m in self.terms for k, e in enumerate(m) if e}

    def degree(self, k=None):
        if not self.terms:
            return -1
        if k is None:
            return max(sum(m) for m in self.terms)
        return max(m[k] for m in self.terms)

    def constant(self):
        """The value if the polynomial is constant, else None."""
        if not self.terms:
            return ZERO
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            if not any(m):
                return c
        return None

    def split(self, k):
        """(a, b) with self = a*x_k + b, assuming degree 1 in x_k."""
        a, b = {}, {}
        for m, c in self.terms.items():
            if m[k]:
                a[m[:k] + (0,) + m[k + 1:]] = c
            else:
                b[m] = c
        return Poly(self.nvars, a), Poly(self.nvars, b)

    def substitute(self, k, value: "Poly"):
        powers = [Poly.const(self.nvars, ONE)]
        out = Poly(self.nvars)
        for m, c in self.terms.items():
            e = m[k]
            while len(powers) <= e:
                powers.append(powers[-1] * value)
            rest = Poly(self.nvars, {m[:k] + (0,) + m[k + 1:]: c})
            out = out + (rest * powers[e] if e else rest)
        return out

    def evaluate(self, point):
        total = ZERO
        for m, c in self.terms.items():
            term = c
            for x, e in zip(point, m):
                if e:
                    term = term * x**e
            total = total + term
        return total

    def __repr__(self):
        return f"Poly({self.terms!r})"


_VALUES = [GaussRat(v) for v in (1, -1, 2, -2, 3)] + [GaussRat(0, 1), GaussRat(1, 1), GaussRat(1, 2) / 2]


def _strip_monomial(p: Poly) -> Poly:
    """Divide out the largest monomial factor."""
    if not p.terms:
        return p
    low = [min(m[k] for m in p.terms) for k in range(p.nvars)]
    if not any(low):
        return p
    return Poly(p.nvars, {tuple(e - l for e, l in zip(m, low)): c for m, c in p.terms.items()})


def _coefficients(p: Poly, k):
    out = {}
    for m, c in p.terms.items():
        key = m[:k] + (0,) + m[k + 1:]
        out.setdefault(m[k], {})[key] = c
    return {j: Poly(p.nvars, t) for j, t in out.items()}


def _substitute(p: Poly, k, num: Poly, den: Poly) -> Poly:
    """p(x_k = num/den) * den^deg_k(p)."""
    if den.constant() == ONE:
        return p.substitute(k, num)
    d = p.degree(k)
    if d <= 0:
        return p
    out = Poly(p.nvars)
    for j, c in _coefficients(p, k).items():
        out = out + c * _power(num, j) * _power(den, d - j)
    return out


def _power(p: Poly, e):
    out = Poly.const(p.nvars, ONE)
    for _ in range(e):
        out = out * p
    return out


def _quadratic_roots(p: Poly, k):
    coef = [ZERO, ZERO, ZERO]
    for m, c in p.terms.items():
        coef[m[k]] = c
    c0, c1, c2 = coef
    disc = (c1 * c1 - 4 * c2 * c0).sqrt()
    if disc is None:
        return []
    return [(-c1 + disc) / (2 * c2), (-c1 - disc) / (2 * c2)]


def _rational_roots(p: Poly, k):
    """Roots in Q(i) of a univariate polynomial, found numerically and checked exactly."""
    deg = p.degree(k)
    coef = [ZERO] * (deg + 1)
    for m, c in p.terms.items():
        coef[deg - m[k]] = c
    try:
        with mpmath.workdps(40):
            approx = mpmath.polyroots([c.to_mpc() for c in coef], maxsteps=200, extraprec=80)
    except mpmath.libmp.NoConvergence:
        return []
    out = []
    for z in approx:
        z = mpmath.mpc(z)
        cand = GaussRat(Fraction(float(z.real)).limit_denominator(10**4),
                        Fraction(float(z.imag)).limit_denominator(10**4))
        if cand not in out and not p.evaluate([cand] * p.nvars):
            out.append(cand)
    return out


def _options(eqs, nvars, rng, values):
    """Candidate eliminations (var, numerator, denominator) in the order to try them."""
    one = Poly.const(nvars, ONE)
    best, rational, splits = None, [], []
    for e in eqs:
        for k in e.variables():
            if e.degree(k) != 1:
                continue
            a, b = e.split(k)
            c = a.constant()
            if c is not None:
                if c and (best is None or len(e.terms) < best[0]):
                    best = (len(e.terms), k, b * (-c.inverse()))
            else:
                splits.append((len(a.terms) + len(b.terms), e, a, b))
                if len(a.terms) == 1:
                    # monomial coefficient: clearing it keeps degrees small
                    rational.append((len(b.terms), k, -b, a))
    if best is not None:
        return [(best[1], best[2], one)]
    for e in eqs:
        vs = e.variables()
        if len(vs) == 1:
            k, = vs
            roots = _quadratic_roots(e, k) if e.degree(k) == 2 else _rational_roots(e, k)
            roots += [v for v in [ZERO, *values] if not e.evaluate([v] * nvars) and v not in roots]
            return [(k, Poly.const(nvars, v), one) for v in roots]
    last = [(k, num, den) for _, k, num, den in sorted(rational, key=lambda r: r[0])[:1]]
    # pin a variable whose value turns some linear coefficient into a constant
    pool = []
    for e in eqs:
        for k in e.variables():
            if e.degree(k) == 1:
                pool.extend(e.split(k)[0].variables())
    if not pool:
        pool = [k for e in eqs for k in e.variables()]
    k = rng.choice(sorted(pool))
    # zero pins reach components the generic values miss
    vals = list(values)
    rng.shuffle(vals)
    vals.insert(0 if rng.random() < 0.3 else len(vals), ZERO)
    # e = a x_k + b may vanish through a = b = 0, which exposes factors of e
    split = [("split", e, (a, b)) for _, e, a, b in sorted(splits, key=lambda r: r[0])[:1]]
    return [(k, Poly.const(nvars, v), one) for v in vals] + split + last


def _resolve(chain, nvars, rng, values):
    """Values for every variable, or None if a denominator vanishes."""
    # a replacement only involves variables eliminated later or never: resolve backwards
    eliminated = {k for k, *_ in chain}
    resolved = {k: rng.choice(values) for k in range(nvars) if k not in eliminated}
    for k, num, den in reversed(chain):
        point = [resolved.get(j, ZERO) for j in range(nvars)]
        d = den.evaluate(point)
        if not d:
            return None
        resolved[k] = num.evaluate(point) / d
    return [resolved[k] for k in range(nvars)]


def _search(eqs, nvars, rng, values, chain, budget, accept):
    if not eqs:
        point = _resolve(chain, nvars, rng, values)
        return point if point is not None and (accept is None or accept(point)) else None
    if any(e.constant() is not None for e in eqs):
        return None
    for k, num, den in _options(eqs, nvars, rng, values):
        if budget[0] <= 0:
            return None
        budget[0] -= 1
        if k == "split":
            rest = [e for e in eqs if e is not num] + [x for x in den if x]
            found = _search(rest, nvars, rng, values, chain, budget, accept)
            if found is not None:
                return found
            continue
        sub = [_substitute(e, k, num, den) for e in eqs]
        if den.constant() is None:
            # factors of the cleared denominator only add spurious roots
            sub = [_strip_monomial(x) for x in sub]
        found = _search([x for x in sub if x], nvars, rng, values, chain + [(k, num, den)], budget, accept)
        if found is not None:
            return found
    return None


def solve_system(eqs, nvars: int, rng: random.Random, values=_VALUES, budget: int = 200, accept=None):
    """Exact point of {eqs = 0}, or None if the bounded search found nothing.

    A depth-first search over eliminations; ``budget`` caps the number of
    substitutions tried.  Variables left unconstrained receive random values.
    Points rejected by ``accept`` make the search backtrack.
    """
    return _search([e for e in eqs if e], nvars, rng, values, [], [budget], accept)
