"""Dense exact linear algebra over any field of scalars (lists of lists).

Field elements only need ``+ - * /`` and truthiness for zero testing, so the
same routines serve GaussRat and ParamRat.  Ring-only routines (determinant,
adjugate) also accept TExpr entries.
"""
from __future__ import annotations

from itertools import permutations

from .scalar import ZERO, ONE

__all__ = [
    "rref",
    "rank",
    "nullspace",
    "solve",
    "identity",
    "matmul",
    "matvec",
    "transpose",
    "inverse",
    "det",
    "adjugate",
    "span_basis",
    "in_span",
    "reduce_modulo",
    "intersect",
]


def identity(n, zero=ZERO, one=ONE):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def transpose(m):
    return [list(r) for r in zip(*m)]


def matmul(a, b):
    bt = transpose(b)
    out = []
    for row in a:
        out_row = []
        for col in bt:
            acc = ZERO
            for x, y in zip(row, col):
                if x and y:
                    acc = acc + x * y
            out_row.append(acc)
        out.append(out_row)
    return out


def matvec(a, v):
    out = []
    for row in a:
        acc = ZERO
        for x, y in zip(row, v):
            if x and y:
                acc = acc + x * y
        out.append(acc)
    return out


def rref(rows, ncols=None):
    """Reduced row echelon form.  Returns (nonzero rows, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = ONE / m[r][c]
        m[r] = [x * inv if x else x for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y if y else x for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows):
    return len(rref(rows)[0])


def nullspace(rows, ncols):
    """Basis of {x : rows @ x = 0}."""
    red, piv = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for r, p in zip(red, piv):
            if red and r[f]:
                v[p] = -r[f]
        basis.append(v)
    return basis


def solve(a, b):
    """One solution x of a x = b, or None if inconsistent."""
    n = len(a[0])
    aug = [list(r) + [bi] for r, bi in zip(a, b)]
    red, piv = rref(aug, n + 1)
    if n in piv:
        return None
    x = [ZERO] * n
    for r, p in zip(red, piv):
        x[p] = r[n]
    return x


def inverse(m):
    n = len(m)
    aug = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(m)]
    red, piv = rref(aug, n)
    if piv != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [r[n:] for r in red]


def det(m):
    """Determinant by permutation expansion; valid over commutative rings (n <= 6)."""
    n = len(m)
    if n == 0:
        return ONE
    total = None
    for perm in permutations(range(n)):
        term = None
        for i, j in enumerate(perm):
            x = m[i][j]
            if not x:
                term = None
                break
            term = x if term is None else term * x
        else:
            if term is None:
                continue
            if _parity(perm):
                term = -term
            total = term if total is None else total + term
    return ZERO if total is None else total


def _parity(perm):
    seen, odd = [False] * len(perm), 0
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        odd ^= (length - 1) & 1
    return odd


def adjugate(m):
    """Classical adjoint: adj(m) @ m = det(m) I."""
    n = len(m)
    if n == 1:
        return [[ONE]]
    adj = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(m) if k != i]
            c = det(minor)
            adj[j][i] = -c if (i + j) % 2 else c
    return adj


def span_basis(vectors, n):
    """Canonical (RREF) basis of the span."""
    return rref(vectors, n)[0] if vectors else []


def reduce_modulo(v, red, piv):
    """Reduce v against an RREF basis (red, piv); zero iff v lies in the span."""
    v = list(v)
    for r, p in zip(red, piv):
        if v[p]:
            f = v[p]
            v = [x - f * y if y else x for x, y in zip(v, r)]
    return v


def in_span(v, red, piv):
    return not any(reduce_modulo(v, red, piv))


def intersect(u, w, n):
    """Intersection of two subspaces given by spanning lists."""
    if not u or not w:
        return []
    # x = sum a_i u_i = sum b_j w_j
    cols = [list(x) for x in u] + [[-y for y in x] for x in w]
    system = transpose(cols)
    sols = nullspace(system, len(cols))
    vecs = []
    for s in sols:
        v = [ZERO] * n
        for coef, x in zip(s[:len(u)], u):
            if coef:
                v = [a + coef * b for a, b in zip(v, x)]
        vecs.append(v)
    return span_basis(vecs, n)
