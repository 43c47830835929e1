"""Non-degeneration certificates.

A certificate for A -/-> B is a closed set R of structures, stable under
lower-triangular basis changes, with A in R and B outside R in every basis.
Membership of A is checked exactly; stability and the absence of a basis
putting B into R are tested by seeded random search.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from . import catalog
from .algebra import COMMUTATIVE, Algebra, Subspace
from .degeneration import Report
from .invariants import derivation_dim
from .parsing import ParseError, evaluate, evaluate_text, parse_expr
from .scalar import ONE, ZERO, GaussRat

__all__ = [
    "ClosedSetSpec",
    "Certificate",
    "parse_certificates",
    "load_certificates",
    "CERTIFICATE_FILES",
    "r_membership",
    "sample_member",
    "borel_stability_evidence",
    "search_basis_into_R",
    "verify_nondegeneration",
    "verify_certificate",
    "random_lower_triangular",
]

CERTIFICATE_FILES = {"tableA4": "nondegenerations3.cert", "tableB5": "nondegenerations4.cert"}
_VALUES = [GaussRat(v) for v in (1, -1, 2, -2)] + [GaussRat(Fraction(1, 2)), GaussRat(Fraction(-1, 2)),
                                                   GaussRat(0, 1), GaussRat(0, -1)]
_DEGREE_CAP = 16


@dataclass(frozen=True)
class ClosedSetSpec:
    """Chains (p, q, r): A_p A_q inside A_r, r = n+1 meaning zero; plus polynomial equations."""

    n: int
    chains: tuple = ()
    polys: tuple = ()  # "lhs = rhs" texts
    param: str = "a"

    def __post_init__(self):
        object.__setattr__(self, "chains", tuple(tuple(c) for c in self.chains))
        object.__setattr__(self, "polys", tuple(self.polys))
        for p, q, r in self.chains:
            if not (1 <= p <= self.n and 1 <= q <= self.n and 1 <= r <= self.n + 1):
                raise ValueError(f"chain ({p}, {q}, {r}) out of range for dimension {self.n}")
        for node in self.nodes:
            for name, idx in _names(node):
                if name == "c" and (len(idx) != 3 or not all(1 <= x <= self.n for x in idx)):
                    raise ValueError(f"bad structure constant c{list(idx)}")

    @property
    def nodes(self):
        out = []
        for text in self.polys:
            lhs, rhs = text.split("=")
            out.append(parse_expr(f"({lhs}) - ({rhs})"))
        return tuple(out)

    def zero_positions(self):
        """0-based (i, j, k) forced to vanish by the chain conditions."""
        out = set()
        for p, q, r in self.chains:
            for i in range(p - 1, self.n):
                for j in range(q - 1, self.n):
                    for k in range(r - 1):
                        out.add((i, j, k))
        return out

    def describe(self):
        parts = []
        for p, q, r in self.chains:
            parts.append(f"A{p}A{q}=0" if r == self.n + 1 else f"A{p}A{q}<=A{r}")
        return ", ".join(parts + list(self.polys))


def _names(node):
    if node.kind == "name":
        yield node.value, node.args
    elif node.kind in ("int",):
        return
    else:
        for a in node.args:
            if hasattr(a, "kind"):
                yield from _names(a)


def _env(c, alpha, param):
    def env(name, idx):
        if name == "c" and len(idx) == 3:
            i, j, k = idx
            return c[i - 1][j - 1][k - 1]
        if name == param and not idx and alpha is not None:
            return alpha
        raise KeyError(name)
    return env


def r_membership(a: Algebra, spec: ClosedSetSpec, alpha=None) -> bool:
    """Exact membership of the structure constants of ``a`` (in its given basis)."""
    if a.n != spec.n:
        raise ValueError("dimension mismatch")
    for i, j, k in spec.zero_positions():
        if a.c[i][j][k]:
            return False
    env = _env(a.c, alpha, spec.param)
    return all(not evaluate(node, env) for node in spec.nodes)


def _numeric_membership(c, spec, alpha, tol):
    for i, j, k in spec.zero_positions():
        if abs(c[i][j][k]) > tol:
            return False
    env = _env(c, None if alpha is None else mpmath.mpmathify(complex(alpha)) if not isinstance(alpha, GaussRat)
               else alpha.to_mpc(), spec.param)
    for node in spec.nodes:
        if abs(evaluate(node, env, numeric=True)) > tol:
            return False
    return True


# sampling members of R -----------------------------------------------------------


def _degree(node, target):
    """Degree of a polynomial AST in the variable c[target]."""
    k = node.kind
    if k == "int":
        return 0
    if k == "name":
        return 1 if node.value == "c" and tuple(x - 1 for x in node.args) in target else 0
    if k == "neg":
        return _degree(node.args[0], target)
    if k in ("add", "sub"):
        return max(_degree(node.args[0], target), _degree(node.args[1], target))
    if k == "mul":
        return _degree(node.args[0], target) + _degree(node.args[1], target)
    if k == "div":
        if _degree(node.args[1], target):
            raise ParseError("variable in a denominator")
        return _degree(node.args[0], target)
    if k == "pow":
        return _degree(node.args[0], target) * int(node.args[1].value)
    raise ParseError(f"unsupported node {k} in a polynomial")


def _groups(n, symmetric):
    if not symmetric:
        return [((i, j, k),) for i in range(n) for j in range(n) for k in range(n)]
    out = []
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                out.append(((i, j, k),) if i == j else ((i, j, k), (j, i, k)))
    return out


def flag_zero_positions(n):
    """Positions c_ij^k with k <= max(i, j): zero for structures nilpotent along the flag."""
    return {(i, j, k) for i in range(n) for j in range(n) for k in range(n) if k <= max(i, j)}


def sample_member(spec: ClosedSetSpec, rng: random.Random, alpha=None, symmetric=False, attempts=20):
    """Random flag-nilpotent structure in R.  Returns (constants, exact: bool).

    Free constants get random small values; each equation is then solved for a
    constant that occurs linearly and not in earlier equations.  Without such
    a constant the equation is solved numerically (50 digits) and the
    structure is returned with mpmath entries.
    """
    n = spec.n
    zeros = spec.zero_positions() | flag_zero_positions(n)
    groups = [g for g in _groups(n, symmetric) if not any(p in zeros for p in g)]
    for _ in range(attempts):
        out = _try_sample(spec, rng, alpha, groups)
        if out is not None:
            return out
    raise ValueError("could not sample a member of R")


def _try_sample(spec, rng, alpha, groups):
    n = spec.n
    c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for g in groups:
        _assign(c, g, rng.choice(_VALUES) if rng.random() < 0.85 else ZERO)
    exact = True
    used = set()
    for node in spec.nodes:
        occurring = [g for g in groups if _degree(node, set(g)) > 0]
        free = sorted((g for g in occurring if not set(g) & used), key=lambda g: _degree(node, set(g)))
        if exact and not evaluate(node, _env(c, alpha, spec.param)):
            pass
        elif not free:
            return None
        else:
            solved = False
            for g in free:
                if _degree(node, set(g)) != 1:
                    continue
                f0 = _eval_at(node, c, g, ZERO, alpha, spec, not exact)
                f1 = _eval_at(node, c, g, ONE, alpha, spec, not exact)
                if f1 != f0:
                    _assign(c, g, -f0 / (f1 - f0))
                    solved = True
                    break
            if not solved:
                for g in free:
                    res = _solve_numeric(node, c, g, alpha, spec) if exact else None
                    if res is not None:
                        c, exact, solved = res, False, True
                        break
            if not solved:
                return None
        used |= {p for g in occurring for p in g}
    return c, exact


def _assign(c, g, v):
    for i, j, k in g:
        c[i][j][k] = v


def _eval_at(node, c, g, v, alpha, spec, numeric=False):
    saved = c[g[0][0]][g[0][1]][g[0][2]]
    _assign(c, g, v.to_mpc() if numeric else v)
    if numeric and isinstance(alpha, GaussRat):
        alpha = alpha.to_mpc()
    with mpmath.workdps(50):
        out = evaluate(node, _env(c, alpha, spec.param), numeric=numeric)
    _assign(c, g, saved)
    return out


def _solve_numeric(node, c, g, alpha, spec):
    """Root of the univariate polynomial in c[g] (other constants fixed), at 50 digits."""
    deg = _degree(node, set(g))
    if deg > _DEGREE_CAP:
        raise ValueError("degree too high")
    xs = [GaussRat(x) for x in range(deg + 1)]
    ys = [_eval_at(node, c, g, x, alpha, spec) for x in xs]
    # Newton interpolation, exact
    coef = list(ys)
    for lvl in range(1, deg + 1):
        for idx in range(deg, lvl - 1, -1):
            coef[idx] = (coef[idx] - coef[idx - 1]) / (xs[idx] - xs[idx - lvl])
    poly = [ZERO]
    for idx in range(deg, -1, -1):
        # poly = poly * (x - xs[idx]) + coef[idx]
        shifted = [ZERO] + poly
        poly = [a - xs[idx] * b for a, b in zip(shifted, poly + [ZERO])]
        poly[0] = poly[0] + coef[idx]
    while len(poly) > 1 and not poly[-1]:
        poly.pop()
    if len(poly) < 2:
        return None
    if not all(isinstance(x, GaussRat) for plane in c for row in plane for x in row):
        return None
    with mpmath.workdps(50):
        coeffs = [p.to_mpc() for p in poly]
        if len(coeffs) == 3:
            c0, c1, c2 = coeffs
            root = (-c1 + mpmath.sqrt(c1 * c1 - 4 * c2 * c0)) / (2 * c2)
        else:
            try:
                root = mpmath.polyroots(coeffs[::-1], maxsteps=200, extraprec=100)[0]
            except mpmath.libmp.NoConvergence:
                return None
        out = [[[x.to_mpc() for x in row] for row in plane] for plane in c]
    for i, j, k in g:
        out[i][j][k] = root
    return out


def random_lower_triangular(n, rng: random.Random):
    return [[(rng.choice(_VALUES) if rng.random() < 0.7 else ZERO) if j < i else
             (rng.choice(_VALUES) if j == i else ZERO) for j in range(n)] for i in range(n)]


def _numeric_change_basis(c, p):
    n = len(c)
    with mpmath.workdps(50):
        pm = mpmath.matrix([[x.to_mpc() if isinstance(x, GaussRat) else x for x in row] for row in p])
        pinv = pm ** -1
        out = [[[mpmath.mpc(0)] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                prod = [mpmath.mpc(0)] * n
                for s in range(n):
                    if pm[s, i] == 0:
                        continue
                    for q in range(n):
                        if pm[q, j] == 0:
                            continue
                        f = pm[s, i] * pm[q, j]
                        for m in range(n):
                            if c[s][q][m] != 0:
                                prod[m] += f * c[s][q][m]
                for k in range(n):
                    out[i][j][k] = sum((pinv[k, m] * prod[m] for m in range(n)), mpmath.mpc(0))
        return out


@dataclass
class StabilityReport:
    trials: int
    passed: int
    exact: int
    failure: str = ""

    @property
    def ok(self):
        return self.passed == self.trials


@lru_cache(maxsize=256)
def borel_stability_evidence(spec: ClosedSetSpec, trials: int = 100, seed: int = 0, alpha=None,
                             symmetric: bool = False) -> StabilityReport:
    """Random flag-nilpotent members of R, moved by random lower-triangular
    matrices, must stay in R."""
    rng = random.Random(seed)
    passed = exact_count = 0
    failure = ""
    for t in range(trials):
        c, exact = sample_member(spec, rng, alpha, symmetric)
        low = random_lower_triangular(spec.n, rng)
        if exact:
            exact_count += 1
            moved = Algebra(c, check=False).change_basis(low)
            ok = r_membership(moved, spec, alpha)
        else:
            with mpmath.workdps(50):
                moved = _numeric_change_basis(c, low)
                scale = max(1, max(abs(x) for plane in c for row in plane for x in row))
                ok = _numeric_membership(moved, spec, alpha, mpmath.mpf(10) ** -30 * scale ** 16)
        if ok:
            passed += 1
        elif not failure:
            failure = f"trial {t}: lower-triangular matrix {[[str(x) for x in r] for r in low]} leaves R"
    return StabilityReport(trials, passed, exact_count, failure)


# searching for a basis of B inside R ------------------------------------------------


def _np_eval(node, c, alpha, param):
    k = node.kind
    if k == "int":
        return complex(node.value)
    if k == "name":
        if node.value == "c":
            i, j, kk = node.args
            return c[:, i - 1, j - 1, kk - 1]
        if node.value == param:
            return complex(alpha.to_mpc()) if isinstance(alpha, GaussRat) else complex(alpha)
        if node.value == "i":
            return 1j
        raise KeyError(node.value)
    if k == "neg":
        return -_np_eval(node.args[0], c, alpha, param)
    a = _np_eval(node.args[0], c, alpha, param)
    if k == "pow":
        return a ** int(node.args[1].value)
    b = _np_eval(node.args[1], c, alpha, param)
    return {"add": lambda: a + b, "sub": lambda: a - b, "mul": lambda: a * b, "div": lambda: a / b}[k]()


_SEARCH_VALUES = _VALUES + [ZERO]
_SEARCH_COMPLEX = np.array([complex(v.to_mpc()) for v in _SEARCH_VALUES])
_ZERO_INDEX = len(_SEARCH_VALUES) - 1


def _flag_bases(b: Algebra):
    """For each column j, a basis of the smallest power/annihilator subspace of dimension >= n - j."""
    n = b.n
    chain = [Subspace.whole(n)] + [s for s in b.powers() if s.dim] + [b.annihilator()]
    out = []
    for j in range(n):
        fits = [s for s in chain if s.dim >= n - j]
        sub = min(fits, key=lambda s: s.dim)
        out.append([list(v) for v in sub.basis])
    return out


def _candidates(b: Algebra, gen: np.random.Generator, m: int):
    """m candidate matrices as value-index arrays plus a structured/random mask.

    Random candidates draw each entry from the value list (zero with
    probability 1/2 in sparse draws).  Structured candidates combine basis
    vectors of the power chain, so the last columns span the deepest powers.
    """
    n = b.n
    k = len(_SEARCH_VALUES)
    idx = gen.integers(0, k - 1, size=(m, n, n))
    sparse = gen.random(m) < 0.5
    holes = (gen.random((m, n, n)) < 0.5) & sparse[:, None, None]
    idx[holes] = _ZERO_INDEX
    structured = gen.random(m) < 0.3
    coef = gen.integers(0, k, size=(m, n, n))  # coef[t, j, v]: weight of basis vector v in column j
    return idx, structured, coef


def _exact_candidate(idx, structured, coef, bases, n):
    if not structured:
        return [[_SEARCH_VALUES[idx[r][c]] for c in range(n)] for r in range(n)]
    cols = []
    for j in range(n):
        v = [ZERO] * n
        for q, vec in enumerate(bases[j]):
            w = _SEARCH_VALUES[coef[j][q]]
            v = [x + w * y for x, y in zip(v, vec)]
        cols.append(v)
    return [[cols[c][r] for c in range(n)] for r in range(n)]


@dataclass
class SearchReport:
    trials: int
    witness: list | None = None
    screened: int = 0

    @property
    def found(self):
        return self.witness is not None


def search_basis_into_R(b: Algebra, spec: ClosedSetSpec, trials: int = 10_000, seed: int = 0,
                        alpha=None, batch: int = 2500) -> SearchReport:
    """Look for P with change_basis(b, P) in R.

    Candidates are screened in floating point and every hit is re-checked
    exactly.  Returning no witness is evidence, not proof.
    """
    n = b.n
    gen = np.random.default_rng(seed)
    if r_membership(b, spec, alpha):
        return SearchReport(0, [[ONE if i == j else ZERO for j in range(n)] for i in range(n)])
    cb = np.array([[[complex(x.to_mpc()) for x in row] for row in plane] for plane in b.c])
    bases = _flag_bases(b)
    bases_c = np.zeros((n, n, n), dtype=complex)  # [column j, vector q, coordinate r]
    for j, vecs in enumerate(bases):
        for q, vec in enumerate(vecs):
            bases_c[j, q] = [complex(x.to_mpc()) for x in vec]
    zeros = sorted(spec.zero_positions())
    zi = tuple(np.array([z[d] for z in zeros], dtype=int) for d in range(3)) if zeros else None
    everything = {(i, j, k) for i in range(n) for j in range(n) for k in range(n)}
    nodes = [(node, _degree(node, everything)) for node in spec.nodes]
    done = screened = 0
    while done < trials:
        m = min(batch, trials - done)
        done += m
        idx, structured, coef = _candidates(b, gen, m)
        p = _SEARCH_COMPLEX[idx]
        weights = _SEARCH_COMPLEX[coef]
        p_struct = np.einsum("tjq,jqr->trj", weights, bases_c)
        p = np.where(structured[:, None, None], p_struct, p)
        det = np.linalg.det(p)
        good = np.abs(det) > 1e-9
        if not good.any():
            continue
        rows = np.nonzero(good)[0]
        pg = p[rows]
        c = np.einsum("tpi,tqj,pqm,tkm->tijk", pg, pg, cb, np.linalg.inv(pg), optimize=True)
        scale = np.maximum(1.0, np.abs(c).reshape(len(c), -1).max(axis=1))
        ok = np.ones(len(c), dtype=bool)
        if zi is not None:
            ok &= np.abs(c[:, zi[0], zi[1], zi[2]]).max(axis=1) <= 1e-9 * scale
        with np.errstate(all="ignore"):
            for node, deg in nodes:
                if not ok.any():
                    break
                ok &= np.abs(_np_eval(node, c, alpha, spec.param)) <= 1e-8 * scale ** deg
        for t in np.nonzero(ok)[0]:
            screened += 1
            r = rows[t]
            mat = _exact_candidate(idx[r], structured[r], coef[r], bases, n)
            try:
                moved = b.change_basis(mat)
            except ZeroDivisionError:
                continue
            if r_membership(moved, spec, alpha):
                return SearchReport(done, mat, screened)
    return SearchReport(done, None, screened)


# certificates -----------------------------------------------------------------------


@dataclass
class CertTarget:
    ident: str
    arg: str | None
    condition: str | None

    def ref(self):
        return self.ident if self.arg is None else f"{self.ident}({self.arg})"


@dataclass
class Certificate:
    id: str
    source: str
    source_arg: str | None
    kind: str
    targets: list
    spec: ClosedSetSpec | None = None
    when: list = field(default_factory=list)
    group: str = ""


def _split(text):
    m = re.fullmatch(r"(\w+?)\s*(?:\((.*)\))?", text.strip())
    if m is None:
        raise ParseError(f"bad algebra reference {text!r}")
    return m.group(1), m.group(2)


def parse_certificates(text: str, group: str = ""):
    out = []
    for blk in catalog.read_blocks(text):
        src, src_arg = _split(blk.get("source"))
        targets = []
        for item in blk.get_all("target"):
            ref, _, cond = item.partition("|")
            ident, arg = _split(ref)
            targets.append(CertTarget(ident, arg, cond.strip() or None))
        kind = blk.get("kind")
        if kind not in ("chain", "flavor", "dimder"):
            raise ParseError(f"{blk.title}: unknown certificate kind {kind!r}")
        spec = None
        if kind == "chain":
            n = catalog.entry(src).dim
            chains = [tuple(int(x) for x in v.split()) for v in blk.get_all("chain")]
            spec = ClosedSetSpec(n, chains, blk.get_all("poly"))
        when = [c.strip() for item in blk.get_all("when") for c in item.split(",") if c.strip()]
        out.append(Certificate(blk.title, src, src_arg, kind, targets, spec, when, group))
    return out


def load_certificates(group: str):
    return parse_certificates(catalog.data_text(CERTIFICATE_FILES[group]), group)


def _holds(cond, env):
    """Evaluate 'lhs != rhs'; an undefined side means no exclusion."""
    lhs, rhs = cond.split("!=")
    try:
        return evaluate_text(lhs, env) != evaluate_text(rhs, env)
    except ZeroDivisionError:
        return True


def verify_nondegeneration(source: Algebra, target: Algebra, cert: Certificate, alpha=None,
                           trials: int = 100, search_trials: int = 10_000, seed: int = 0) -> dict:
    """Run one certificate on a concrete (source, target) pair."""
    if cert.kind == "flavor":
        ok_src = source.is_commutative()
        ok_tgt = not target.is_commutative()
        return {"verdict": "pass" if ok_src and ok_tgt else "fail",
                "source_commutative": ok_src, "target_noncommutative": ok_tgt}
    if cert.kind == "dimder":
        ds, dt = derivation_dim(source), derivation_dim(target)
        return {"verdict": "pass" if ds >= dt else "fail", "der_source": ds, "der_target": dt}
    spec = cert.spec
    member = r_membership(source, spec, alpha)
    if not member:
        return {"verdict": "fail", "membership": False,
                "failure": "source structure is not in R (transcription error)"}
    stab = borel_stability_evidence(spec, trials, seed, alpha, symmetric=source.declared == COMMUTATIVE)
    search = search_basis_into_R(target, spec, search_trials, seed, alpha)
    verdict = "pass" if stab.ok and not search.found else "fail"
    out = {"verdict": verdict, "membership": True,
           "borel": f"{stab.passed}/{stab.trials}", "borel_exact_samples": stab.exact,
           "search": "none (semi-decision)" if not search.found else "basis found",
           "search_trials": search.trials}
    if stab.failure:
        out["failure"] = stab.failure
    if search.found:
        out["failure"] = f"basis puts the target into R: {[[str(x) for x in r] for r in search.witness]}"
    return out


def verify_certificate(cert: Certificate, trials: int = 100, search_trials: int = 10_000, seed: int = 0):
    """Reports for every (source sample, target, target sample) combination of a row."""
    reports = []
    src_samples = [None]
    if cert.source_arg is not None:
        src_samples = catalog.samples(cert.source) if cert.source_arg == "a" else [evaluate_text(cert.source_arg, {})]
    for a in src_samples:
        env = {} if a is None else {"a": a}
        if any(not _holds(c, env) for c in cert.when):
            continue
        source = catalog.get(cert.source, a)
        for tgt in cert.targets:
            b_samples = [None]
            if tgt.arg is not None:
                b_samples = catalog.samples(tgt.ident) if tgt.arg == "b" else [evaluate_text(tgt.arg, env)]
            for b in b_samples:
                tenv = dict(env)
                if b is not None:
                    tenv["b"] = b
                label = tgt.ident if b is None else f"{tgt.ident}({b})"
                src_label = cert.source if a is None else f"{cert.source}({a})"
                rid = f"{src_label} -/-> {label}"
                if tgt.condition and not _holds(tgt.condition, tenv):
                    reports.append(Report(rid, "nondegeneration", "skip", "exact",
                                          {"row": cert.id, "message": f"excluded by {tgt.condition}"}))
                    continue
                target = catalog.get(tgt.ident, b)
                res = verify_nondegeneration(source, target, cert, a, trials, search_trials, seed)
                verdict = res.pop("verdict")
                mode = {"chain": "exact+semi-decision", "flavor": "exact", "dimder": "exact"}[cert.kind]
                reports.append(Report(rid, "nondegeneration", verdict, mode,
                                      {"row": cert.id, "kind": cert.kind, **res}))
    return reports
