"""Verification of degenerations through parametric bases.

A witness gives vectors E_1(t), ..., E_n(t) in the coordinates of the source
algebra.  The structure constants in that basis are adj(E) mu(E_i, E_j) / det E
and must tend to the target's constants as t -> 0.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import reduce

import mpmath

from . import catalog, linalg
from .algebra import Algebra
from .catalog import DomainError
from .parsing import NonExactValue, ParseError, Vec, evaluate_text
from .scalar import DIVERGES, ONE, ZERO, GaussRat, TExpr, _series, limit_at_zero

__all__ = [
    "Witness",
    "SampleResult",
    "Report",
    "parse_witnesses",
    "load_witnesses",
    "WITNESS_FILES",
    "transport",
    "limit_constants",
    "numeric_deviation",
    "verify_degeneration",
    "verify_family_target",
    "verify_witness",
    "DEFAULT_FAMILY_SAMPLES",
    "NUMERIC_TS",
]

WITNESS_FILES = {
    "tableA3": "degenerations3.wit",
    "tableB3": "degenerations4.wit",
    "tableB4": "families4.wit",
    "anticommutative": "degenerations5.wit",
    "anticommutative-extra": "supplementary5.wit",
}
DEFAULT_FAMILY_SAMPLES = ("-1", "2", "3", "1/2", "i")
NUMERIC_TS = ("1e-4", "1e-6", "1e-8")
NUMERIC_TOL = mpmath.mpf("1e-10")


@dataclass
class Witness:
    id: str
    source: str
    source_arg: str | None
    target: str
    target_arg: str | None
    rows: list
    when: list = field(default_factory=list)
    lets: list = field(default_factory=list)
    param: str = "a"
    define: str | None = None
    samples: list = field(default_factory=list)
    group: str = ""
    note: str = ""

    @property
    def dim(self):
        return len(self.rows)

    def mentions_parameter(self) -> bool:
        texts = [self.source_arg or "", self.target_arg or "", self.define or ""]
        texts += [r for r in self.rows] + [e for _, e in self.lets] + [f"{x}{y}" for x, y in self.when]
        names = {self.param, "a"}
        return any(re.search(rf"\b{n}\b", s) for s in texts for n in names)

    def source_uses_t(self) -> bool:
        return bool(self.source_arg and re.search(r"\bt\b", self.source_arg))


_ID_ARG = re.compile(r"^(\w+?)\s*(?:\((.*)\))?$")


def _split_id(text):
    m = _ID_ARG.match(text.strip())
    if m is None:
        raise ParseError(f"bad algebra reference {text!r}")
    return m.group(1), m.group(2)


def parse_witnesses(text: str, group: str = ""):
    out = []
    for blk in catalog.read_blocks(text):
        src, src_arg = _split_id(blk.get("source") or "")
        tgt, tgt_arg = _split_id(blk.get("target") or "")
        index = blk.get("index")
        if index:
            name, expr = (s.strip() for s in index.split("=", 1))
            src_arg = expr
        when = []
        for item in blk.get_all("when"):
            for cond in item.split(","):
                if cond.strip():
                    lhs, rhs = cond.split("!=")
                    when.append((lhs.strip(), rhs.strip()))
        lets, rows = [], {}
        for line in blk.body:
            m = re.fullmatch(r"let\s+(\w+)\s*=\s*(.+)", line)
            if m:
                lets.append((m.group(1), m.group(2)))
                continue
            m = re.fullmatch(r"E_?(\d+)\s*=\s*(.+)", line)
            if m is None:
                raise ParseError(f"{blk.title}: bad witness line {line!r}")
            rows[int(m.group(1))] = m.group(2)
        n = len(rows)
        if sorted(rows) != list(range(1, n + 1)):
            raise ParseError(f"{blk.title}: basis rows must be E1..En")
        samples = [s.strip() for item in blk.get_all("samples") for s in item.split(",") if s.strip()]
        define = blk.get("define")
        out.append(Witness(
            id=blk.title,
            source=src, source_arg=src_arg,
            target=tgt, target_arg=tgt_arg,
            rows=[rows[k] for k in range(1, n + 1)],
            when=when, lets=lets,
            param=blk.get("param", "a"),
            define=define.split("=", 1)[1].strip() if define else None,
            samples=samples,
            group=group,
            note=blk.get("corrected", ""),
        ))
    return out


def load_witnesses(group: str):
    return parse_witnesses(catalog.data_text(WITNESS_FILES[group]), group)


# transport -----------------------------------------------------------------


def _texpr(x):
    return x if isinstance(x, TExpr) else TExpr.const(x)


def _products(a: Algebra, e):
    """mu(E_i, E_j) as coordinate vectors, E given by columns of e."""
    n = a.n
    cols = [[e[r][i] for r in range(n)] for i in range(n)]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = [ZERO] * n
            for p, x in enumerate(cols[i]):
                if not x:
                    continue
                for q, y in enumerate(cols[j]):
                    if not y:
                        continue
                    f = x * y
                    for k, ck in enumerate(a.c[p][q]):
                        if ck:
                            acc[k] = acc[k] + f * ck
            out[i][j] = acc
    return out


def transport(a: Algebra, e):
    """Structure constants of ``a`` in the basis of columns of ``e``.

    Returns an n x n x n array of (numerator, denominator) pairs with the
    common denominator det E; when det E is a monomial the pairs are divided
    out exactly and the denominator is ONE.
    """
    n = a.n
    e = [[_texpr(x) for x in row] for row in e]
    d = linalg.det(e)
    if not d:
        raise ZeroDivisionError("parametric basis is singular")
    adj = linalg.adjugate(e)
    prods = _products(a, e)
    mono = d.is_monomial()
    dinv = d.inverse() if mono else None
    out = []
    for i in range(n):
        plane = []
        for j in range(n):
            num = linalg.matvec(adj, prods[i][j])
            if mono:
                plane.append([(_texpr(x) * dinv, ONE) for x in num])
            else:
                plane.append([(_texpr(x), d) for x in num])
        out.append(plane)
    return out


def _leading(x):
    """(exponent, coefficient) of the lowest-order term, expanding radicals."""
    if not isinstance(x, TExpr):
        x = _texpr(x)
    if not x.terms:
        return None, ZERO
    if not x.has_radicals():
        return x.leading()
    v0 = x.valuation()
    order = 4
    while order <= 64:
        ser = _series(x, order)
        low = [q for q in ser if q < v0 + order]
        if low:
            q = min(low)
            return q, ser[q]
        order *= 2
    raise ValueError("could not find the leading term within series order 64")


def _limit(num, den):
    if den == ONE or (isinstance(den, TExpr) and den.constant() == ONE):
        return limit_at_zero(num)
    vn, cn = _leading(num)
    vd, cd = _leading(den)
    if vn is None:
        return ZERO
    if vn > vd:
        return ZERO
    if vn < vd:
        return DIVERGES
    return cn / cd


def limit_constants(a: Algebra, e):
    """Limits of the transported constants; entries may be DIVERGES."""
    tr = transport(a, e)
    n = a.n
    return [[[_limit(*tr[i][j][k]) for k in range(n)] for j in range(n)] for i in range(n)]


def _mp(x, t0):
    if isinstance(x, TExpr):
        return x.eval_numeric(t0)
    return GaussRat.coerce(x).to_mpc()


def numeric_deviation(a: Algebra, e, target: Algebra, t0, dps: int = 50):
    """max |c_ij^k(t0) - target_ij^k| with working precision ``dps``."""
    n = a.n
    with mpmath.workdps(dps):
        t0 = mpmath.mpf(t0)
        em = mpmath.matrix([[_mp(x, t0) for x in row] for row in e])
        einv = em ** -1
        cols = [[em[r, i] for r in range(n)] for i in range(n)]
        cs = [[[_mp(a.c[p][q][k], t0) for k in range(n)] for q in range(n)] for p in range(n)]
        worst = mpmath.mpf(0)
        for i in range(n):
            for j in range(n):
                prod = [mpmath.mpc(0)] * n
                for p in range(n):
                    if cols[i][p] == 0:
                        continue
                    for q in range(n):
                        f = cols[i][p] * cols[j][q]
                        if f == 0:
                            continue
                        for k in range(n):
                            if cs[p][q][k] != 0:
                                prod[k] += f * cs[p][q][k]
                for k in range(n):
                    val = sum((einv[k, m] * prod[m] for m in range(n)), mpmath.mpc(0))
                    worst = max(worst, abs(val - target.c[i][j][k].to_mpc()))
        return worst


# verification ------------------------------------------------------------------


@dataclass
class SampleResult:
    label: str
    verdict: str  # pass | fail | skip
    mode: str = "exact"
    message: str = ""
    source: Algebra | None = None
    target: Algebra | None = None
    numeric: list | None = None
    numeric_ok: bool | None = None
    numeric_note: str = ""

    def as_dict(self):
        d = {"sample": self.label, "verdict": self.verdict, "mode": self.mode}
        if self.message:
            d["message"] = self.message
        if self.numeric is not None:
            d["deviations"] = [mpmath.nstr(x, 5) for x in self.numeric]
            d["numeric_verdict"] = "pass" if self.numeric_ok else "fail"
            if self.numeric_note:
                d["numeric_note"] = self.numeric_note
        return d


@dataclass
class Report:
    id: str
    kind: str
    verdict: str
    mode: str
    details: dict = field(default_factory=dict)
    samples: list = field(default_factory=list)

    def as_dict(self):
        d = dict(self.details)
        if self.samples:
            d["samples"] = [s.as_dict() for s in self.samples]
        return {"id": self.id, "kind": self.kind, "verdict": self.verdict,
                "mode": self.mode, "details": d}


def _basis_env(n, extra):
    env = dict(extra)
    for k in range(n):
        env[f"e{k + 1}"] = Vec.unit(k)
        env[f"e_{k + 1}"] = Vec.unit(k)
    return env


def _basis_matrix(w: Witness, env):
    n = w.dim
    env = dict(env)
    for name, expr in w.lets:
        env[name] = evaluate_text(expr, env)
    cols = []
    for k, row in enumerate(w.rows):
        v = evaluate_text(row, env)
        if not isinstance(v, Vec):
            raise ParseError(f"{w.id}: E{k + 1} is not a vector")
        cols.append(v.dense(n, ZERO))
    return [[_texpr(cols[c][r]) for c in range(n)] for r in range(n)]


def _resolve(ident, arg, env, allow_t):
    """Catalog algebra for ``ident(arg)``; arg may depend on t when allow_t."""
    if arg is None:
        return catalog.get(ident)
    value = evaluate_text(arg, env)
    if isinstance(value, TExpr):
        const = value.constant()
        if const is None:
            if not allow_t:
                raise ParseError(f"{ident}({arg}) may not depend on t")
            return catalog.build(ident, value)
        value = const
    return catalog.get(ident, value)


def _uses_radicals_in_t(e):
    return any(isinstance(x, TExpr) and x.has_radicals() for row in e for x in row)


def verify_degeneration(source: Algebra, e, target: Algebra, numeric=False, dps=50, label=""):
    """Check one concrete witness.  Returns a SampleResult."""
    n = source.n
    if target.n != n or len(e) != n:
        return SampleResult(label, "fail", message="dimension mismatch")
    e, _ = clear_powers(e, source)
    try:
        lim = limit_constants(source, e)
    except ZeroDivisionError as exc:
        return SampleResult(label, "fail", message=str(exc))
    bad = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                got, want = lim[i][j][k], target.c[i][j][k]
                if got is DIVERGES:
                    bad.append(f"c[{i + 1}][{j + 1}][{k + 1}] diverges")
                elif got != want:
                    bad.append(f"c[{i + 1}][{j + 1}][{k + 1}] -> {got}, expected {want}")
    result = SampleResult(label, "fail" if bad else "pass", "exact", "; ".join(bad[:4]),
                          source=source, target=target)
    if numeric:
        devs = [numeric_deviation(source, e, target, t0, dps) for t0 in NUMERIC_TS]
        result.numeric = devs
        result.mode = "exact+numeric"
        monotone = all(b <= a for a, b in zip(devs, devs[1:]))
        result.numeric_ok = monotone and devs[-1] < NUMERIC_TOL
        if not result.numeric_ok:
            result.numeric_note = "deviation not shrinking" if not monotone else \
                f"deviation {mpmath.nstr(devs[-1], 3)} at t=1e-8 exceeds 1e-10"
    return result


def clear_powers(e, source):
    """Substitute t = s^N when exponents are fractional (source constants included)."""
    dens = set()
    for row in e:
        for x in row:
            dens |= x.exponent_denominators()
    for plane in source.c:
        for row in plane:
            for x in row:
                if isinstance(x, TExpr):
                    dens |= x.exponent_denominators()
    n = reduce(math.lcm, dens, 1)
    if n == 1:
        return e, 1
    return [[x.substitute_power(n) for x in row] for row in e], n


def _admissible(w: Witness, env):
    for lhs, rhs in w.when:
        if evaluate_text(lhs, env) == evaluate_text(rhs, env):
            return f"excluded by {lhs} != {rhs}"
    return None


def _run_sample(w: Witness, env, label, dps):
    try:
        why = _admissible(w, env)
        if why:
            return SampleResult(label, "skip", message=why)
        src = _resolve(w.source, w.source_arg, env, allow_t=True)
        tgt = _resolve(w.target, w.target_arg, env, allow_t=False)
        e = _basis_matrix(w, env)
    except DomainError as exc:
        return SampleResult(label, "skip", message=str(exc))
    except NonExactValue as exc:
        return SampleResult(label, "skip", message=f"not exact: {exc}")
    except ZeroDivisionError as exc:
        return SampleResult(label, "skip", message=f"undefined: {exc}")
    return verify_degeneration(src, e, tgt, numeric=_uses_radicals_in_t(e), dps=dps, label=label)


def _sample_values(w: Witness):
    base = [] if w.param != "a" else list(DEFAULT_FAMILY_SAMPLES)
    seen, out = set(), []
    for s in base + w.samples:
        v = evaluate_text(s, {})
        if v not in seen:
            seen.add(v)
            out.append((s, v))
    return out


def verify_family_target(w: Witness, dps: int = 50) -> Report:
    """Run a parameter-dependent witness at each sampled parameter value."""
    results = []
    t = TExpr.t()
    for text, value in _sample_values(w):
        env = {"t": t, w.param: value}
        label = f"{w.param}={value}"
        if w.define:
            try:
                alpha = evaluate_text(w.define, env)
            except ZeroDivisionError as exc:
                results.append(SampleResult(label, "skip", message=str(exc)))
                continue
            env["a"] = alpha
            label += f" (a={alpha})"
        results.append(_run_sample(w, _basis_env(w.dim, env), label, dps))
    return _summarize(w, results)


def _summarize(w, results):
    ran = [r for r in results if r.verdict != "skip"]
    if not ran:
        verdict = "fail"
    else:
        verdict = "pass" if all(r.verdict == "pass" for r in ran) else "fail"
    modes = sorted({r.mode for r in ran}) or ["exact"]
    details = {"source": _ref(w.source, w.source_arg), "target": _ref(w.target, w.target_arg),
               "checked": len(ran), "skipped": len(results) - len(ran)}
    bad = [r for r in ran if r.verdict == "fail"]
    if bad:
        details["failure"] = f"{bad[0].label}: {bad[0].message}"
    if not ran:
        details["failure"] = "no admissible sample"
    numeric = [r for r in ran if r.numeric is not None]
    if numeric:
        details["numeric_verdict"] = "pass" if all(r.numeric_ok for r in numeric) else "fail"
    if w.note:
        details["corrected"] = w.note
    return Report(w.id, "degeneration", verdict, "+".join(modes), details, results)


def _ref(ident, arg):
    return ident if arg is None else f"{ident}({arg})"


def verify_witness(w: Witness, dps: int = 50) -> Report:
    """Verify a witness row, sampling the family parameter when present."""
    if w.mentions_parameter():
        return verify_family_target(w, dps)
    env = _basis_env(w.dim, {"t": TExpr.t()})
    return _summarize(w, [_run_sample(w, env, "", dps)])


def monotone_sample(r: SampleResult, proper: bool) -> bool:
    """Derivation dimensions along a verified sample: strict for proper degenerations."""
    from .invariants import derivation_dim
    ds, dt = derivation_dim(r.source), derivation_dim(r.target)
    return ds < dt if proper else ds <= dt



def scaling_witness(source: Algebra, label: str = "") -> SampleResult:
    """E_i = t e_i: every structure degenerates to the zero algebra of its dimension."""
    n = source.n
    t = TExpr.t()
    zero_t = TExpr.const(ZERO)
    e = [[t if r == c else zero_t for c in range(n)] for r in range(n)]
    return verify_degeneration(source, e, Algebra.zero(n, source.declared, f"ZERO{n}"), label=label)
