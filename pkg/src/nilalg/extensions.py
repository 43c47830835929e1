"""Central extensions: coboundaries, second cohomology, and the automorphism action.

Bilinear forms on an m-dimensional algebra are m x m matrices theta with
theta[i][j] = theta(e_i, e_j).  ``D_ij`` is the symmetric basis form
E_ij + E_ji (E_ii on the diagonal) or the alternating one E_ij - E_ji.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from functools import lru_cache

from . import catalog, linalg
from .algebra import ANTICOMMUTATIVE, COMMUTATIVE, GENERAL, Algebra, Subspace
from .parsing import Vec, evaluate_text
from .scalar import ONE, ZERO, GaussRat

__all__ = [
    "SYMMETRIC",
    "ANTISYMMETRIC",
    "Cocycle",
    "CocycleClass",
    "ExtensionSpec",
    "delta",
    "coboundary_basis",
    "h2_basis",
    "cohomology_class",
    "act_automorphism",
    "central_extension",
    "ts_check",
    "annihilator_formula_check",
    "perp",
    "parse_cocycle",
    "format_cocycle",
    "ExtensionData",
    "extension_data",
]

SYMMETRIC = "symmetric"
ANTISYMMETRIC = "antisymmetric"


@dataclass(frozen=True)
class Cocycle:
    base: Algebra
    matrix: tuple
    flavor: str = GENERAL

    def __post_init__(self):
        m = tuple(tuple(row) for row in self.matrix)
        object.__setattr__(self, "matrix", m)
        n = self.base.n
        if len(m) != n or any(len(r) != n for r in m):
            raise ValueError("cocycle matrix must be m x m")
        if self.flavor == SYMMETRIC and any(m[i][j] != m[j][i] for i in range(n) for j in range(n)):
            raise ValueError("matrix is not symmetric")
        if self.flavor == ANTISYMMETRIC and any(m[i][j] + m[j][i] for i in range(n) for j in range(n)):
            raise ValueError("matrix is not alternating")

    def vector(self):
        return [x for row in self.matrix for x in row]

    def __add__(self, other):
        return Cocycle(self.base, [[x + y for x, y in zip(r, s)] for r, s in zip(self.matrix, other.matrix)],
                       self.flavor if self.flavor == other.flavor else GENERAL)

    def scale(self, c):
        return Cocycle(self.base, [[c * x for x in r] for r in self.matrix], self.flavor)

    def __str__(self):
        return format_cocycle(self)


def _from_vector(base, vec, flavor):
    n = base.n
    return Cocycle(base, [[vec[i * n + j] for j in range(n)] for i in range(n)], flavor)


def delta(base: Algebra, i: int, j: int, flavor: str) -> Cocycle:
    """D_ij with 1-based indices."""
    n = base.n
    m = [[ZERO] * n for _ in range(n)]
    i, j = i - 1, j - 1
    m[i][j] = ONE
    if i != j:
        if flavor == SYMMETRIC:
            m[j][i] = ONE
        elif flavor == ANTISYMMETRIC:
            m[j][i] = -ONE
    elif flavor == ANTISYMMETRIC:
        raise ValueError("alternating forms vanish on the diagonal")
    return Cocycle(base, m, flavor)


def _deltas(base, flavor):
    n = base.n
    out = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if flavor == SYMMETRIC and j < i:
                continue
            if flavor == ANTISYMMETRIC and j <= i:
                continue
            out.append(((i, j), delta(base, i, j, flavor)))
    return out


def _coboundary_flavor(base):
    fl = base.flavor()
    return {COMMUTATIVE: SYMMETRIC, ANTICOMMUTATIVE: ANTISYMMETRIC}.get(fl, GENERAL)


def coboundary_basis(base: Algebra):
    """Basis of B^2: the forms (x, y) -> f(xy) for linear functionals f."""
    n = base.n
    flavor = _coboundary_flavor(base)
    vecs = []
    for k in range(n):
        vecs.append([base.c[i][j][k] for i in range(n) for j in range(n)])
    red, _ = linalg.rref([v for v in vecs if any(v)], n * n) if any(any(v) for v in vecs) else ([], [])
    return [_from_vector(base, v, flavor) for v in red]


@dataclass(frozen=True)
class CocycleClass:
    representative: Cocycle
    modulo: tuple  # RREF rows of B^2
    pivots: tuple

    def __eq__(self, other):
        if not isinstance(other, CocycleClass):
            return NotImplemented
        diff = [x - y for x, y in zip(self.representative.vector(), other.representative.vector())]
        return linalg.in_span(diff, self.modulo, self.pivots)

    def __hash__(self):
        return hash(tuple(self.representative.vector()))


@lru_cache(maxsize=64)
def _b2_echelon(base: Algebra):
    n = base.n
    vecs = [[base.c[i][j][k] for i in range(n) for j in range(n)] for k in range(n)]
    vecs = [v for v in vecs if any(v)]
    if not vecs:
        return (), ()
    red, piv = linalg.rref(vecs, n * n)
    return tuple(tuple(r) for r in red), tuple(piv)


def cohomology_class(theta: Cocycle) -> CocycleClass:
    """Class of theta with the canonical representative reduced modulo B^2."""
    red, piv = _b2_echelon(theta.base)
    v = linalg.reduce_modulo(theta.vector(), red, piv)
    return CocycleClass(_from_vector(theta.base, v, theta.flavor), red, piv)


def h2_basis(base: Algebra, flavor: str):
    """Basis of the symmetric (or alternating, or full) part of H^2(A, C).

    D_ij are added in lexicographic order whenever independent of B^2 and the
    forms chosen so far.  Returns a list of (label, CocycleClass).
    """
    n = base.n
    red, piv = _b2_echelon(base)
    rows, pivs = [list(r) for r in red], list(piv)
    if flavor == GENERAL:
        candidates = []
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                m = [[ZERO] * n for _ in range(n)]
                m[i - 1][j - 1] = ONE
                candidates.append(((i, j), Cocycle(base, m, GENERAL)))
    else:
        candidates = _deltas(base, flavor)
    out = []
    for (i, j), d in candidates:
        v = d.vector()
        if rows and linalg.in_span(v, rows, pivs):
            continue
        rows, pivs = linalg.rref(rows + [v], n * n)
        out.append((f"D{i}{j}", cohomology_class(d)))
    return out


def act_automorphism(theta: Cocycle, phi, check: bool = False) -> Cocycle:
    """(phi theta)(x, y) = theta(phi x, phi y), i.e. the matrix phi^T theta phi."""
    if check and theta.base.change_basis(phi).c != theta.base.c:
        raise ValueError("phi is not an automorphism of the base algebra")
    m = linalg.matmul(linalg.matmul(linalg.transpose(phi), [list(r) for r in theta.matrix]), phi)
    return Cocycle(theta.base, m, theta.flavor)


@dataclass(frozen=True)
class ExtensionSpec:
    base: Algebra
    thetas: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(self.thetas))
        if not self.thetas:
            raise ValueError("an extension needs at least one cocycle")
        if any(th.base != self.base for th in self.thetas):
            raise ValueError("cocycles over different bases")


def central_extension(spec: ExtensionSpec, name=None) -> Algebra:
    """A + V with (x+x')(y+y') = xy + sum theta_l(x, y) e_{m+l}."""
    m, s = spec.base.n, len(spec.thetas)
    n = m + s
    c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for i in range(m):
        for j in range(m):
            for k in range(m):
                c[i][j][k] = spec.base.c[i][j][k]
            for l, th in enumerate(spec.thetas):
                c[i][j][m + l] = th.matrix[i][j]
    alg = Algebra(c, GENERAL, name, check=False)
    fl = alg.flavor()
    return Algebra(c, fl if fl != GENERAL or alg.is_zero_product() else GENERAL, name, check=False)


def perp(thetas, n) -> Subspace:
    """Common radical {x : theta(x, A) = theta(A, x) = 0 for every theta}."""
    rows = []
    for th in thetas:
        for j in range(n):
            rows.append([th.matrix[i][j] for i in range(n)])
            rows.append([th.matrix[j][i] for i in range(n)])
    return Subspace(n, linalg.nullspace(rows, n)) if rows else Subspace.whole(n)


def ts_check(spec: ExtensionSpec) -> str:
    """'ok', 'annihilator_overlap' or 'dependent_classes'."""
    n = spec.base.n
    overlap = perp(spec.thetas, n).intersect(spec.base.annihilator())
    if overlap.dim:
        return "annihilator_overlap"
    reps = [cohomology_class(th).representative.vector() for th in spec.thetas]
    if linalg.rank(reps) < len(reps):
        return "dependent_classes"
    return "ok"


def annihilator_formula_check(spec: ExtensionSpec) -> bool:
    """Ann(A_theta) = (theta-perp meet Ann(A)) + V, both sides computed independently."""
    m, s = spec.base.n, len(spec.thetas)
    ext = central_extension(spec)
    lhs = ext.annihilator()
    part = perp(spec.thetas, m).intersect(spec.base.annihilator())
    vecs = [list(v) + [ZERO] * s for v in part.basis]
    vecs += [[ONE if k == m + l else ZERO for k in range(m + s)] for l in range(s)]
    return lhs == Subspace(m + s, vecs)


# text form -----------------------------------------------------------------------


def parse_cocycle(text: str, base: Algebra, flavor: str, names=None) -> Cocycle:
    """Parse a combination of D_ij symbols (and optional named generators)."""
    n = base.n

    def env(name, idx):
        m = re.fullmatch(r"D_?(\d)(\d)", name)
        if m and not idx:
            return Vec({p: x for p, x in enumerate(delta(base, int(m.group(1)), int(m.group(2)), flavor).vector())})
        if names and name in names:
            return names[name]
        raise KeyError(name)

    v = evaluate_text(text, env)
    if not isinstance(v, Vec):
        raise ValueError(f"{text!r} is not a bilinear form")
    return _from_vector(base, v.dense(n * n, ZERO), flavor)


def format_cocycle(theta: Cocycle) -> str:
    n = theta.base.n
    m = theta.matrix
    parts = []
    for i in range(n):
        for j in range(n):
            x = m[i][j]
            if not x:
                continue
            if theta.flavor == SYMMETRIC and j < i:
                continue
            if theta.flavor == ANTISYMMETRIC and j <= i:
                continue
            sym = f"D{i + 1}{j + 1}" if theta.flavor != GENERAL else f"E{i + 1}{j + 1}"
            if x == ONE:
                parts.append(sym)
            elif x == -ONE:
                parts.append("-" + sym)
            else:
                parts.append(f"({x})*{sym}")
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += p if p.startswith("-") else "+" + p
    return out


# stored automorphism families and canonical representatives ------------------------


@dataclass
class AutFamily:
    matrix: list  # entries are expression strings in the family variables
    closed: list  # closed-form coefficient of n_k, strings in a1.. and the variables
    order: list | None = None

    def variables(self):
        names = set()
        for row in self.matrix:
            for x in row:
                names |= set(re.findall(r"[a-z]\w*", x))
        return sorted(names - {"i"})


@dataclass
class ExtensionData:
    base_id: str
    flavor: str
    h2: list
    nabla: list
    auts: list
    reps: list  # (cocycle text in n_k and a, target reference)

    @property
    def base(self) -> Algebra:
        return catalog.base(self.base_id)

    def nabla_cocycles(self):
        return [parse_cocycle(s, self.base, self.flavor) for s in self.nabla]

    def cocycle(self, text, alpha=None):
        names = {f"n{k + 1}": Vec({p: x for p, x in enumerate(th.vector())})
                 for k, th in enumerate(self.nabla_cocycles())}
        if alpha is not None:
            names["a"] = alpha
        return parse_cocycle(text, self.base, self.flavor, names)

    def nabla_coordinates(self, theta: Cocycle):
        """Coordinates of the class of theta in the basis n_1, n_2, ... of H^2."""
        reps = [cohomology_class(th).representative.vector() for th in self.nabla_cocycles()]
        target = cohomology_class(theta).representative.vector()
        sol = linalg.solve(linalg.transpose(reps), target)
        if sol is None:
            raise ValueError("class is not in the span of the stored generators")
        return sol

    def sample_automorphism(self, index: int, rng: random.Random):
        """Random member of an automorphism family with nonzero determinant."""
        fam = self.auts[index]
        values = [GaussRat(v) for v in (1, -1, 2, -2, 3)] + [GaussRat(0, 1), GaussRat(1, 2), GaussRat(-1, 3),
                                                              GaussRat(1, 1), GaussRat(2, -1)]
        while True:
            env = {v: rng.choice(values) for v in fam.variables()}
            mat = [[evaluate_text(x, env) for x in row] for row in fam.matrix]
            if linalg.rank(mat) == len(mat):
                return mat, env


def _matrix_text(text):
    return [row.split() for row in text.split(";")]


@catalog.register_cache
@lru_cache(maxsize=None)
def _load_extension_data():
    out = {}
    for blk in catalog.read_blocks(catalog.data_text("extensions.dat")):
        auts, reps = [], []
        for key, value in blk.meta:
            if key == "aut":
                auts.append(AutFamily(_matrix_text(value), []))
            elif key == "closed":
                auts[-1].closed = [s.strip() for s in value.split(";")]
            elif key == "order":
                auts[-1].order = [int(x) for x in value.split()]
            elif key == "rep":
                lhs, rhs = value.split("->")
                reps.append((lhs.strip(), rhs.strip()))
        for fam in auts[1:]:
            if not fam.closed:
                fam.closed = auts[0].closed
        split = lambda s: [x.strip() for x in (s or "").split(",") if x.strip()]
        out[blk.title] = ExtensionData(
            base_id=blk.get("base"),
            flavor=blk.get("flavor"),
            h2=split(blk.get("h2")),
            nabla=split(blk.get("nabla")),
            auts=auts,
            reps=reps,
        )
    return out


def extension_data(base_id: str | None = None):
    data = _load_extension_data()
    return data if base_id is None else data[base_id]


def closed_form_coefficients(data: ExtensionData, index: int, env, alphas):
    """Evaluate the stored closed forms for phi(theta) with theta = sum a_k n_k."""
    fam = data.auts[index]
    env = dict(env)
    for k, a in enumerate(alphas):
        env[f"a{k + 1}"] = a
    values = [evaluate_text(s, env) for s in fam.closed]
    if fam.order:
        values = [values[k - 1] for k in fam.order]
    return values
