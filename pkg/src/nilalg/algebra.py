"""Finite-dimensional algebras given by structure constants.

``c[i][j][k]`` is the coefficient of e_k in e_i e_j (0-based internally; the
text format and reports are 1-based).
"""
from __future__ import annotations

import re

from . import linalg
from .parsing import Vec, evaluate_text, ParseError
from .scalar import ZERO, ONE, as_scalar

__all__ = [
    "Algebra",
    "Subspace",
    "COMMUTATIVE",
    "ANTICOMMUTATIVE",
    "GENERAL",
    "parse_algebra",
    "format_algebra",
]

COMMUTATIVE = "commutative"
ANTICOMMUTATIVE = "anticommutative"
GENERAL = "general"
FLAVORS = (GENERAL, COMMUTATIVE, ANTICOMMUTATIVE)
MAX_DIM = 8


class Subspace:
    """A subspace of F^n stored by its canonical reduced echelon basis."""

    __slots__ = ("n", "basis", "pivots")

    def __init__(self, n: int, vectors=()):
        vectors = [list(v) for v in vectors if any(v)]
        red, piv = linalg.rref(vectors, n) if vectors else ([], [])
        self.n = n
        self.basis = tuple(tuple(r) for r in red)
        self.pivots = tuple(piv)

    @classmethod
    def whole(cls, n):
        return cls(n, linalg.identity(n))

    @classmethod
    def zero(cls, n):
        return cls(n, [])

    @classmethod
    def flag(cls, n, i):
        """A_i = <e_i, ..., e_n> with 1-based i; i = n+1 gives the zero space."""
        return cls(n, [linalg.identity(n)[k] for k in range(i - 1, n)])

    @property
    def dim(self):
        return len(self.basis)

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.n == other.n and self.basis == other.basis

    def __hash__(self):
        return hash((self.n, self.basis))

    def contains(self, v) -> bool:
        return linalg.in_span(v, self.basis, self.pivots)

    def is_subspace_of(self, other: "Subspace") -> bool:
        return all(other.contains(v) for v in self.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace(self.n, list(self.basis) + list(other.basis))

    def intersect(self, other: "Subspace") -> "Subspace":
        return Subspace(self.n, linalg.intersect(list(self.basis), list(other.basis), self.n))

    def __repr__(self):
        rows = ", ".join("(" + ", ".join(str(x) for x in r) + ")" for r in self.basis)
        return f"Subspace(n={self.n}, [{rows}])"


class Algebra:
    """An n-dimensional algebra over a field of scalars.

    ``declared`` is the flavor the algebra claims to have (used to choose the
    variety for random sampling and cohomology); ``flavor()`` computes the
    actual symmetry of the structure constants.
    """

    __slots__ = ("n", "c", "declared", "name")

    def __init__(self, c, declared: str = GENERAL, name: str | None = None, check: bool = True):
        n = len(c)
        if not 1 <= n <= MAX_DIM:
            raise ValueError(f"dimension {n} outside 1..{MAX_DIM}")
        rows = []
        for i in range(n):
            if len(c[i]) != n:
                raise ValueError("structure constants must be n x n x n")
            row = []
            for j in range(n):
                if len(c[i][j]) != n:
                    raise ValueError("structure constants must be n x n x n")
                row.append(tuple(as_scalar(x) for x in c[i][j]))
            rows.append(tuple(row))
        if declared not in FLAVORS:
            raise ValueError(f"unknown flavor {declared!r}")
        self.n = n
        self.c = tuple(rows)
        self.declared = declared
        self.name = name
        if check and declared != GENERAL and not self._has_symmetry(declared):
            raise ValueError(f"structure constants are not {declared}")

    @classmethod
    def zero(cls, n, declared=GENERAL, name=None):
        return cls([[[ZERO] * n for _ in range(n)] for _ in range(n)], declared, name)

    @classmethod
    def from_products(cls, n, products, declared=GENERAL, name=None):
        """Build from {(i, j): vector} with 0-based indices, completing symmetry."""
        c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
        for (i, j), vec in products.items():
            c[i][j] = [as_scalar(x) for x in vec]
            if declared == COMMUTATIVE and i != j:
                c[j][i] = list(c[i][j])
            elif declared == ANTICOMMUTATIVE:
                if i == j:
                    raise ValueError("anticommutative algebra with a nonzero square")
                c[j][i] = [-x for x in c[i][j]]
        return cls(c, declared, name)

    def __eq__(self, other):
        return isinstance(other, Algebra) and self.n == other.n and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        label = self.name or "Algebra"
        return f"<{label} dim={self.n} {self.declared}>"

    def with_name(self, name):
        return Algebra(self.c, self.declared, name, check=False)

    # products --------------------------------------------------------------
    def product_vector(self, i, j):
        return list(self.c[i][j])

    def multiply(self, x, y):
        if len(x) != self.n or len(y) != self.n:
            raise ValueError("dimension mismatch in multiply")
        out = [ZERO] * self.n
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                if not yj:
                    continue
                f = xi * yj
                for k, ck in enumerate(self.c[i][j]):
                    if ck:
                        out[k] = out[k] + f * ck
        return out

    def is_zero_product(self) -> bool:
        return not any(x for plane in self.c for row in plane for x in row)

    # symmetry ------------------------------------------------------------------
    def _has_symmetry(self, flavor):
        n, c = self.n, self.c
        for i in range(n):
            for j in range(i, n):
                for k in range(n):
                    a, b = c[i][j][k], c[j][i][k]
                    if flavor == COMMUTATIVE and a != b:
                        return False
                    if flavor == ANTICOMMUTATIVE and (a + b or (i == j and a)):
                        return False
        return True

    def flavor(self) -> str:
        """Actual symmetry; the zero product counts as commutative."""
        if self._has_symmetry(COMMUTATIVE):
            return COMMUTATIVE
        if self._has_symmetry(ANTICOMMUTATIVE):
            return ANTICOMMUTATIVE
        return GENERAL

    def is_commutative(self):
        return self._has_symmetry(COMMUTATIVE)

    def is_anticommutative(self):
        return self._has_symmetry(ANTICOMMUTATIVE)

    # basis change ----------------------------------------------------------------
    def change_basis(self, p, inverse=None) -> "Algebra":
        """Structure constants in the basis given by the columns of ``p``."""
        n = self.n
        if len(p) != n or any(len(r) != n for r in p):
            raise ValueError("basis change must be n x n")
        pinv = inverse if inverse is not None else linalg.inverse(p)
        cols = [[p[r][i] for r in range(n)] for i in range(n)]
        c = []
        for i in range(n):
            plane = []
            for j in range(n):
                plane.append(linalg.matvec(pinv, self.multiply(cols[i], cols[j])))
            c.append(plane)
        return Algebra(c, self.declared, self.name, check=False)

    # subspaces ---------------------------------------------------------------------
    def annihilator(self) -> Subspace:
        n = self.n
        rows = []
        # x e_j = 0 and e_j x = 0 for every j, as linear equations in x
        for j in range(n):
            for k in range(n):
                rows.append([self.c[i][j][k] for i in range(n)])
                rows.append([self.c[j][i][k] for i in range(n)])
        return Subspace(n, linalg.nullspace(rows, n))

    def subspace_product(self, u: Subspace, w: Subspace) -> Subspace:
        vecs = [self.multiply(list(a), list(b)) for a in u.basis for b in w.basis]
        return Subspace(self.n, vecs)

    def square(self) -> Subspace:
        whole = Subspace.whole(self.n)
        return self.subspace_product(whole, whole)

    def powers(self, limit=None):
        """[A^1, A^2, ...] with A^k the sum of A^p A^q over p + q = k.

        Stops at the first zero term.  The chain is descending; an index
        above 2^n + 1 means it never reaches zero.
        """
        limit = limit or (2**self.n + 1)
        pw = [None, Subspace.whole(self.n)]
        for k in range(2, limit + 1):
            acc = Subspace.zero(self.n)
            for p in range(1, k):
                acc = acc + self.subspace_product(pw[p], pw[k - p])
            pw.append(acc)
            if acc.dim == 0:
                break
        return pw[1:]

    def nilpotency_index(self):
        """Smallest k with A^k = 0, or None if the chain never reaches zero."""
        pw = self.powers()
        return len(pw) if pw[-1].dim == 0 else None

    def lower_central_dims(self):
        return tuple(s.dim for s in self.powers())


def parse_algebra(text: str, params=None, name=None) -> Algebra:
    """Parse ``dim n; flavor;`` followed by product lines ``e1 e2 = e3 - 2 e4``.

    Several products may share a line when separated by commas.  ``params``
    binds extra names (for instance ``a``) used in coefficients.
    """
    params = dict(params or {})
    lines = [ln.split("#", 1)[0].strip() for ln in text.strip().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParseError("empty algebra text")
    header = re.fullmatch(r"dim\s+(\d+)\s*;\s*(\w+)\s*;?(.*)", lines[0])
    if header is None:
        raise ParseError(f"bad algebra header {lines[0]!r}")
    n, declared = int(header.group(1)), header.group(2)
    if declared not in FLAVORS:
        raise ParseError(f"unknown flavor {declared!r}")
    body = [header.group(3)] + lines[1:]
    env = dict(params)
    for k in range(n):
        env[f"e{k + 1}"] = Vec.unit(k)
        env[f"e_{k + 1}"] = Vec.unit(k)
    products = {}
    for line in body:
        for item in line.split(","):
            item = item.strip().rstrip(".")
            if not item:
                continue
            m = re.fullmatch(r"e_?(\d+)\s*(?:\*|\s)\s*e_?(\d+)\s*=\s*(.+)", item)
            if m is None:
                raise ParseError(f"bad product line {item!r}")
            i, j = int(m.group(1)) - 1, int(m.group(2)) - 1
            if not (0 <= i < n and 0 <= j < n):
                raise ParseError(f"index out of range in {item!r}")
            value = evaluate_text(m.group(3), env)
            if not isinstance(value, Vec):
                if value:
                    raise ParseError(f"right-hand side of {item!r} is not a vector")
                value = Vec()
            if (i, j) in products:
                raise ParseError(f"product e{i + 1}e{j + 1} given twice")
            products[(i, j)] = value.dense(n, ZERO)
    if declared == COMMUTATIVE:
        for (i, j) in list(products):
            if (j, i) in products and i < j and products[(j, i)] != products[(i, j)]:
                raise ParseError(f"e{i + 1}e{j + 1} and e{j + 1}e{i + 1} disagree in a commutative algebra")
        products = {k: v for k, v in products.items() if k[0] <= k[1] or (k[1], k[0]) not in products}
    if declared == ANTICOMMUTATIVE:
        products = {k: v for k, v in products.items() if k[0] < k[1] or (k[1], k[0]) not in products}
    return Algebra.from_products(n, products, declared, name)


def _fmt_vector(vec):
    parts = []
    for k, x in enumerate(vec):
        if not x:
            continue
        basis = f"e{k + 1}"
        if x == ONE:
            parts.append(basis)
        elif x == -ONE:
            parts.append("-" + basis)
        else:
            s = str(x)
            if getattr(x, "is_compound", lambda: False)() or "+" in s[1:] or "-" in s[1:]:
                s = f"({s})"
            parts.append(f"{s}*{basis}")
    out = parts[0]
    for p in parts[1:]:
        out += p if p.startswith("-") else "+" + p
    return out


def format_algebra(a: Algebra) -> str:
    """Inverse of parse_algebra (listing each unordered pair once for symmetric flavors)."""
    lines = [f"dim {a.n}; {a.declared};"]
    for i in range(a.n):
        for j in range(a.n):
            if a.declared in (COMMUTATIVE, ANTICOMMUTATIVE) and j < i:
                continue
            vec = a.c[i][j]
            if any(vec):
                lines.append(f"e{i + 1} e{j + 1} = {_fmt_vector(vec)}")
    return "\n".join(lines) + "\n"
