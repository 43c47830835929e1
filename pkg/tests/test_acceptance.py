"""Acceptance criteria, one test and one PASS/FAIL line each.

Criteria that cannot hold as stated are run faithfully and marked
``xfail(strict=True)``: they fail today, and the suite notices if they start
passing.  The split-out "as corrected" tests pin down exactly which rows are
responsible.
"""
import random
import time

import pytest

from conftest import ACCEPTANCE_LINES, SEEDS, random_cocycle, random_extension, random_invertible, random_nilpotent
from nilalg import cli, linalg
from nilalg.extensions import (
    SYMMETRIC, Cocycle, ExtensionSpec, annihilator_formula_check, central_extension, cohomology_class,
    extension_data,
)
from nilalg.scalar import GaussRat

CFG = cli.Config()


def report(number, title, ok, detail=""):
    line = f"criterion {number:2d}  {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def _fails(records):
    return [r.id for r in records if r.verdict == "fail"]


# 1 ---------------------------------------------------------------------------------


def _der_rows():
    start = time.perf_counter()
    rows = cli.der_table()
    return rows, time.perf_counter() - start


def _families_sampled(rows):
    counts = {}
    for label, *_ in rows:
        if "(" in label:
            counts[label.split("(")[0]] = counts.get(label.split("(")[0], 0) + 1
    return min(counts.values()) >= 3


@pytest.mark.xfail(strict=True, reason="printed dim Der of A02, A03, A05 disagree with exact computation")
def test_criterion_01_der_table_printed():
    rows, secs = _der_rows()
    real = [r for r in rows if not r[0].startswith("ZERO")]
    bad = [f"{label}: computed {d}, printed {p}" for label, d, _, p in real if d != p]
    ok = not bad and secs < 10 and _families_sampled(rows)
    report(1, "dim Der equals the printed table", ok, "; ".join(bad) or f"{secs:.1f} s")
    assert ok


def test_criterion_01_der_table_as_corrected():
    rows, secs = _der_rows()
    real = [r for r in rows if not r[0].startswith("ZERO")]
    assert len({r[0].split("(")[0] for r in real}) == 8 + 30 + 11
    assert _families_sampled(rows)
    assert all(d == expected for _, d, expected, _ in real)
    assert sorted(label for label, d, _, p in real if d != p) == ["A02", "A03", "A05"]
    assert secs < 10


# 2 ---------------------------------------------------------------------------------


def _numeric_rows(reports):
    return [(r.id, s) for r in reports for s in r.samples if s.numeric is not None]


@pytest.mark.xfail(strict=True, reason="C18 -> C22 converges at rate O(t): deviation 1e-8 at t = 1e-8")
def test_criterion_02_degenerations(witness_run):
    reports, secs = witness_run
    groups = {g: [r for r in reports if r.details["group"] == g] for g in cli.WITNESS_FILES}
    exact_ok = not _fails(reports)
    numeric_bad = [rid for rid, s in _numeric_rows(reports) if not s.numeric_ok]
    sizes = (len(groups["tableA3"]), len(groups["tableB4"]), len(groups["anticommutative"]))
    ok = exact_ok and not numeric_bad and secs < 120 and sizes == (11, 6, 1)
    detail = f"{len(reports)} rows exact-verified in {secs:.1f} s"
    if numeric_bad:
        detail += f"; numeric tolerance missed: {', '.join(numeric_bad)}"
    report(2, "degeneration corpus verifies", ok, detail)
    assert ok


def test_criterion_02_exact_clause(witness_run):
    reports, secs = witness_run
    assert _fails(reports) == []
    assert sum(r.details["group"] == "tableB3" for r in reports) >= 60
    assert secs < 120
    numeric = _numeric_rows(reports)
    assert [rid for rid, _ in numeric] == ["C18 -> C22"]
    assert all(s.verdict == "pass" for _, s in numeric)


# 3 ---------------------------------------------------------------------------------


def test_criterion_03_nondegenerations(certificate_run):
    reports, secs = certificate_run
    chain = [r for r in reports if r.mode == "exact+semi-decision" and r.verdict != "skip"]
    flavor = [r for r in reports if r.details.get("kind") == "flavor"]
    ok = (not _fails(reports) and secs < 300
          and all(r.details["membership"] and r.details["borel"] == "100/100" for r in chain)
          and all(r.details["search"].startswith("none") and r.details["search_trials"] == 10_000 for r in chain)
          and any(r.id == "N1 -/-> N7" for r in flavor) and all(r.verdict == "pass" for r in flavor))
    passed = sum(r.verdict == "pass" for r in reports)
    report(3, "non-degeneration certificates hold", ok, f"{passed} pairs in {secs:.0f} s, search none/10^4")
    assert ok


# 4 ---------------------------------------------------------------------------------


def test_criterion_04_monotonicity(witness_reports):
    records = cli.check_monotonicity(witness_reports)
    family = [r for r in records if "note" in r.details]
    ok = not _fails(records) and len(records) == len(witness_reports)
    report(4, "dim Der increases along degenerations", ok,
           f"{len(records) - len(family)} strict, {len(family)} family rows with generic Der <= target")
    assert ok


# 5 ---------------------------------------------------------------------------------


def test_criterion_05_cohomology():
    records = cli.check_cohomology()
    dims = {r.id: r.details["dim"] for r in records}
    ok = dims == {"H2(C01)": 5, "H2(C02)": 4, "H2(C03)": 4, "H2(C04)": 5, "H2(A01)": 5, "H2(A02)": 4}
    report(5, "dim H2 for the six base algebras", ok and not _fails(records),
           ", ".join(f"{k}={v}" for k, v in dims.items()))
    assert ok and not _fails(records)


# 6 ---------------------------------------------------------------------------------


def test_criterion_06_extensions():
    records = cli.check_extensions(CFG)
    a11 = [r for r in records if r.id.startswith("A02 + n4")]
    ok = not _fails(records) and len(a11) == 1 and a11[0].details["target"] == "A11"
    report(6, "central extensions match their catalog entries", ok,
           f"{len(records)} representatives, every isomorphism exact-verified")
    assert ok


# 7 ---------------------------------------------------------------------------------


def test_criterion_07_automorphism_action():
    records = cli.check_automorphisms(CFG)
    ids = sorted(r.id for r in records)
    ok = not _fails(records) and ids == ["Aut(A02)", "Aut(C01)", "Aut(C02)", "Aut(C03)", "Aut(C04)"] \
        and all(r.details["draws"] >= 200 and r.details["mismatches"] == 0 for r in records)
    report(7, "automorphism action matches closed forms", ok,
           f"{sum(r.details['draws'] for r in records)} draws, 0 mismatches" if ok else str(_fails(records)))
    assert ok


# 8 ---------------------------------------------------------------------------------


def test_criterion_08_rigidity(witness_reports):
    records = cli.check_rigidity(witness_reports, CFG)
    maxima = {r.id: r.details["maximal"] for r in records}
    families = [r for r in witness_reports if r.details["group"] == "tableB4"]
    ok = (not _fails(records)
          and maxima == {"nilpotent3": ["N2"], "commutative4": ["C19(*)"], "anticommutative5": ["A11"]}
          and len(families) == 6 and all(r.verdict == "pass" for r in families))
    report(8, "rigid algebras are the maximal elements", ok, "; ".join(f"{k}: {v}" for k, v in maxima.items()))
    assert ok


# 9 ---------------------------------------------------------------------------------


def _property_failures(seed):
    rng = random.Random(seed)
    bad = []
    for _ in range(100):
        _, spec = random_extension(rng)
        if not annihilator_formula_check(spec):
            bad.append("annihilator")
        ext = central_extension(spec)
        flavor = "commutative" if spec.thetas[0].flavor == SYMMETRIC else "anticommutative"
        if ext.flavor() != flavor and not ext.is_zero_product():
            bad.append("flavor")
    for flavor in ("general", "commutative", "anticommutative"):
        for _ in range(10):
            a = random_nilpotent(rng, 4, flavor)
            p, q = random_invertible(rng, 4), random_invertible(rng, 4)
            if a.change_basis(p).change_basis(q) != a.change_basis(linalg.matmul(p, q)):
                bad.append("action law")
    for _ in range(30):
        data = extension_data(rng.choice(["C01", "C02", "C03", "C04", "A02"]))
        base, m = data.base, data.base.n
        _, spec = random_extension_on(rng, data)
        theta = spec.thetas[0]
        f = [GaussRat(rng.choice([1, -1, 2, 3])) for _ in range(m)]
        df = [[sum((base.c[i][j][k] * f[k] for k in range(m)), GaussRat(0)) for j in range(m)]
              for i in range(m)]
        shifted = Cocycle(base, [[x + y for x, y in zip(r, s)] for r, s in zip(theta.matrix, df)], data.flavor)
        if cohomology_class(theta) != cohomology_class(shifted):
            bad.append("quotient class")
        p = linalg.identity(m + 1)
        for i in range(m):
            p[m][i] = -f[i]
        if central_extension(ExtensionSpec(base, [theta])).change_basis(p) != \
                central_extension(ExtensionSpec(base, [shifted])):
            bad.append("quotient extension")
    return bad


def random_extension_on(rng, data):
    cls, cob = random_cocycle(rng, data)
    return data, ExtensionSpec(data.base, [Cocycle(data.base, (cls + cob).matrix, data.flavor)])


def test_criterion_09_property_suites():
    bad = {seed: _property_failures(seed) for seed in SEEDS}
    ok = not any(bad.values())
    report(9, "property suites under seeds 0, 1, 2", ok,
           "annihilator formula, action law, flavor, quotient: 0 failures" if ok else str(bad))
    assert ok


# 10 --------------------------------------------------------------------------------


def test_criterion_10_consistency(witness_reports, certificate_reports):
    records = cli.check_consistency(witness_reports, certificate_reports)
    remark_ids = sorted(r.id for r in records if r.id != "witness/certificate conflicts")
    ok = not _fails(records) and remark_ids == ["C09 -/-> C26", "C26 -/-> C08"]
    report(10, "no pair is both degenerated and certified", ok, "0 conflicts; remark pairs derived")
    assert ok
