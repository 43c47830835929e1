"""Isomorphism invariants and a bounded isomorphism search."""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import permutations

from . import linalg
from .polys import Poly, solve_system
from .algebra import Algebra, Subspace
from .scalar import GaussRat, ZERO, ONE

__all__ = [
    "derivation_dim",
    "derivation_basis",
    "Fingerprint",
    "fingerprint",
    "find_isomorphism",
    "random_invertible",
]


def _derivation_system(a: Algebra):
    """Rows of the linear system for D with D(e_b) = sum_a d[a][b] e_a.

    Unknown d[a][b] sits at column a*n + b.
    """
    n, c = a.n, a.c
    rows = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                row = [ZERO] * (n * n)
                # D(e_i e_j)_k = sum_m c_ij^m d[k][m]
                for m in range(n):
                    if c[i][j][m]:
                        row[k * n + m] = row[k * n + m] + c[i][j][m]
                # - (D(e_i) e_j)_k = - sum_a d[a][i] c_aj^k
                for s in range(n):
                    if c[s][j][k]:
                        row[s * n + i] = row[s * n + i] - c[s][j][k]
                # - (e_i D(e_j))_k = - sum_b d[b][j] c_ib^k
                for s in range(n):
                    if c[i][s][k]:
                        row[s * n + j] = row[s * n + j] - c[i][s][k]
                if any(row):
                    rows.append(row)
    return rows


def derivation_dim(a: Algebra) -> int:
    n = a.n
    rows = _derivation_system(a)
    return n * n - (linalg.rank(rows) if rows else 0)


def derivation_basis(a: Algebra):
    """Basis of Der(A) as n x n matrices (column b = image of e_b)."""
    n = a.n
    rows = _derivation_system(a)
    out = []
    for v in linalg.nullspace(rows, n * n):
        out.append([[v[r * n + col] for col in range(n)] for r in range(n)])
    return out


@dataclass(frozen=True)
class Fingerprint:
    dim: int
    flavor: str
    der: int
    ann: int
    powers: tuple
    squares: int
    nil_index: int | None
    extras: tuple = ()

    def line(self) -> str:
        pw = ",".join(str(d) for d in self.powers)
        ex = ",".join(str(d) for d in self.extras)
        return (f"dim={self.dim} flavor={self.flavor} der={self.der} ann={self.ann} "
                f"powers=[{pw}] squares={self.squares} nil={self.nil_index} extras=[{ex}]")

    __str__ = line


def _squares_dim(a: Algebra) -> int:
    n = a.n
    vecs = []
    for i in range(n):
        vecs.append(list(a.c[i][i]))
        for j in range(i + 1, n):
            vecs.append([x + y for x, y in zip(a.c[i][j], a.c[j][i])])
    return Subspace(n, vecs).dim


def fingerprint(a: Algebra) -> Fingerprint:
    pw = a.powers()
    ann = a.annihilator()
    sq = pw[1] if len(pw) > 1 else Subspace.zero(a.n)
    whole = Subspace.whole(a.n)
    extras = (
        sq.intersect(ann).dim,
        a.subspace_product(sq, sq).dim,
        a.subspace_product(whole, sq).dim,
        a.subspace_product(sq, whole).dim,
    )
    return Fingerprint(
        dim=a.n,
        flavor=a.flavor(),
        der=derivation_dim(a),
        ann=ann.dim,
        powers=tuple(s.dim for s in pw[1:]),
        squares=_squares_dim(a),
        nil_index=a.nilpotency_index(),
        extras=extras,
    )


def _is_iso(a: Algebra, b: Algebra, p) -> bool:
    try:
        return a.change_basis(p).c == b.c
    except ZeroDivisionError:
        return False


_SMALL = [GaussRat(1), GaussRat(-1), GaussRat(2), GaussRat(-2), GaussRat(1, 2),
          GaussRat(0, 1), GaussRat(0, -1), GaussRat(3), GaussRat(-1, 2)]
_ROOT_TRIES = [ONE, -ONE, GaussRat(0, 1), GaussRat(0, -1), GaussRat(2), GaussRat(1, 2)]


def _diagonal_scaling(a: Algebra, b: Algebra, free_values):
    """Solve change_basis(a, diag(l)) = b for l, if the zero patterns agree."""
    n = a.n
    eqs = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                x, y = a.c[i][j][k], b.c[i][j][k]
                if bool(x) != bool(y):
                    return None
                if x:
                    eqs.append((i, j, k, y / x))  # l_i l_j / l_k = y/x
    lam = [None] * n
    free_iter = iter(free_values)
    while True:
        progress = True
        while progress:
            progress = False
            for i, j, k, r in eqs:
                unknown = {v for v in (i, j, k) if lam[v] is None}
                if len(unknown) != 1:
                    continue
                u = unknown.pop()
                if u == k and k not in (i, j):
                    lam[k] = lam[i] * lam[j] / r
                elif u == k:
                    # l_i l_j / l_k with k equal to i or j: the unknown cancels
                    other = j if k == i else i
                    if lam[other] != r:
                        return None
                    continue
                elif i == j == u:
                    sq = r * lam[k]
                    root = sq.sqrt()
                    if root is None:
                        return None
                    lam[u] = root
                else:
                    other = j if u == i else i
                    lam[u] = r * lam[k] / lam[other]
                progress = True
        if all(v is not None for v in lam):
            break
        try:
            nxt = next(free_iter)
        except StopIteration:
            nxt = ONE
        lam[lam.index(None)] = nxt
    return [[lam[i] if i == j else ZERO for j in range(n)] for i in range(n)]


def random_invertible(n, rng: random.Random, values=_SMALL, density=1.0):
    while True:
        p = [[rng.choice(values) if rng.random() < density else ZERO for _ in range(n)] for _ in range(n)]
        if linalg.rank(p) == n:
            return p


def _adapted_basis(b: Algebra):
    """Columns g_1..g_r (a complement of b^2) followed by products of earlier columns.

    Returns (q, recipe) with recipe[k] = (i, j) meaning column k is column i
    times column j; in the new basis that product is exactly e_k.
    """
    n = b.n
    ident = linalg.identity(n)
    sq = b.square()
    cols = []
    span = Subspace(n, sq.basis)
    for v in ident:
        if not span.contains(v):
            cols.append(v)
            span = span + Subspace(n, [v])
    r = len(cols)
    recipe = {}
    span = Subspace(n, cols)
    grew = True
    while len(cols) < n and grew:
        grew = False
        for i in range(len(cols)):
            for j in range(len(cols)):
                w = b.multiply(cols[i], cols[j])
                if any(w) and not span.contains(w):
                    recipe[len(cols)] = (i, j)
                    cols.append(w)
                    span = span + Subspace(n, [w])
                    grew = True
    if len(cols) < n:
        return None
    return linalg.transpose(cols), recipe, r


def _poly_multiply(a: Algebra, x, y):
    n = a.n
    out = [Poly(x[0].nvars) for _ in range(n)]
    for i in range(n):
        if not x[i]:
            continue
        for j in range(n):
            if not y[j]:
                continue
            xy = x[i] * y[j]
            for k in range(n):
                if a.c[i][j][k]:
                    out[k] = out[k] + xy * a.c[i][j][k]
    return out


def _orbit_system(a: Algebra, b: Algebra):
    """Unknown images of b's adapted generators in a, and the equations they satisfy."""
    adapted = _adapted_basis(b)
    if adapted is None:
        return None
    q, recipe, r = adapted
    b2 = b.change_basis(q)
    n, nv = a.n, r * a.n
    images = [[Poly.var(nv, g * n + row) for row in range(n)] for g in range(r)]
    for k in range(r, n):
        i, j = recipe[k]
        images.append(_poly_multiply(a, images[i], images[j]))
    eqs = []
    for i in range(n):
        for j in range(n):
            lhs = _poly_multiply(a, images[i], images[j])
            for k in range(n):
                c = b2.c[i][j][k]
                if c:
                    for row in range(n):
                        lhs[row] = lhs[row] - images[k][row] * c
            eqs.extend(x for x in lhs if x)
    return q, images, eqs, nv


def _solve_isomorphism(a: Algebra, b: Algebra, rng: random.Random, attempts: int):
    system = _orbit_system(a, b)
    if system is None:
        return None, 0
    q, images, eqs, nv = system
    qinv = linalg.inverse(q)

    def matrix(point):
        cols = [[x.evaluate(point) for x in img] for img in images]
        return linalg.matmul(linalg.transpose(cols), qinv)

    def invertible(point):
        return linalg.rank(matrix(point)) == a.n

    for attempt in range(attempts):
        point = solve_system(eqs, nv, rng, accept=invertible)
        if point is None:
            continue
        p = matrix(point)
        if _is_iso(a, b, p):
            return p, attempt + 1
    return None, attempts


def find_isomorphism(a: Algebra, b: Algebra, budget: int = 2000, seed: int = 0):
    """Search for P with change_basis(a, P) == b; every hit is verified exactly.

    Monomial maps (a permutation times a diagonal) are tried first.  Then the
    images of generators of b are treated as unknowns, the images of the
    remaining adapted basis vectors follow from products, and the structure
    equations are solved exactly by randomized elimination.

    Returns None when fingerprints differ or nothing is found within the
    budget.  None is not a proof of non-isomorphism unless fingerprints differ.
    """
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    n = a.n
    if a.c == b.c:
        return linalg.identity(n)
    if fingerprint(a) != fingerprint(b):
        return None
    rng = random.Random(seed)
    tried = 0
    if n <= 6:
        for perm in permutations(range(n)):
            q = [[ONE if perm[col] == row else ZERO for col in range(n)] for row in range(n)]
            pa = a.change_basis(q, inverse=linalg.transpose(q))
            for attempt in range(3):
                free = _ROOT_TRIES if attempt == 0 else [rng.choice(_ROOT_TRIES) for _ in range(n)]
                d = _diagonal_scaling(pa, b, free)
                tried += 1
                if d is None:
                    break
                p = linalg.matmul(q, d)
                if _is_iso(a, b, p):
                    return p
            if tried >= budget:
                return None
    # each exact solver attempt costs about as much as 25 permutation trials
    p, _ = _solve_isomorphism(a, b, rng, max(1, (budget - tried) // 25))
    return p
