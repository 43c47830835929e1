import dataclasses

import mpmath
import pytest

from nilalg import catalog
from nilalg.algebra import Algebra
from nilalg.degeneration import (
    load_witnesses, monotone_sample, parse_witnesses, scaling_witness, verify_witness,
)
from nilalg.invariants import derivation_dim


def witness(text):
    (w,) = parse_witnesses(text)
    return w


def by_id(group):
    return {w.id: w for w in load_witnesses(group)}


def test_corpus_sizes():
    assert len(load_witnesses("tableA3")) == 11
    assert len(load_witnesses("tableB4")) == 6
    assert len(load_witnesses("anticommutative")) == 1


def test_every_corpus_row_passes(witness_reports):
    failed = [r.id for r in witness_reports if r.verdict != "pass"]
    assert failed == []
    assert len(witness_reports) == 105


def test_table_a3_rows(witness_reports):
    rows = [r for r in witness_reports if r.details["group"] == "tableA3"]
    assert len(rows) == 11 and all(r.mode == "exact" for r in rows)


def test_simple_contraction():
    w = witness("[N2 -> N3]\nsource: N2\ntarget: N3\nE1 = t*e1\nE2 = t^2*e2\nE3 = t^3*e3\n")
    assert verify_witness(w).verdict == "pass"


def test_corrupted_coefficient_fails():
    w = by_id("tableA3")["N2 -> N3"]
    bad = dataclasses.replace(w, rows=["t*e1", "2*t^2*e2", "t^3*e3"])
    rep = verify_witness(bad)
    assert rep.verdict == "fail"
    assert "c[" in rep.samples[0].message


def test_divergent_basis_fails():
    w = by_id("tableA3")["N2 -> N3"]
    bad = dataclasses.replace(w, rows=["1/t*e1", "t^2*e2", "t^3*e3"])
    rep = verify_witness(bad)
    assert rep.verdict == "fail"


@pytest.mark.parametrize("ident,printed", [
    ("C10 -> C11", ["t e1 + e2 -1/2t^(-1) e3", "t e2 - e3", "t e3", "t^2 e4"]),
    ("C11 -> C03", ["t e1", "t^2 e2", "t^2 e3", "t^3 e4"]),
    ("C13 -> C09", ["e2", "e3", "-t e1", "t e4"]),
])
def test_printed_bases_with_errata_fail(ident, printed):
    w = by_id("tableB3")[ident]
    assert w.note  # the corrected row says what changed
    assert verify_witness(w).verdict == "pass"
    assert verify_witness(dataclasses.replace(w, rows=printed)).verdict == "fail"


def test_radical_row_exact_and_numeric(witness_reports):
    rep = next(r for r in witness_reports if r.id == "C18 -> C22")
    assert rep.verdict == "pass"
    (s,) = rep.samples
    assert s.mode == "exact+numeric"
    # the transported constants converge at rate O(t): deviation ~ t
    for t0, dev in zip(("1e-4", "1e-6", "1e-8"), s.numeric):
        assert mpmath.mpf(t0) / 10 < dev < 10 * mpmath.mpf(t0)
    assert s.numeric_ok is False


def test_family_rows_checked_at_samples(witness_reports):
    rows = [r for r in witness_reports if r.details["group"] == "tableB4"]
    assert len(rows) == 6
    for r in rows:
        assert r.verdict == "pass" and r.details["checked"] >= 1


def test_parametric_rows_respect_conditions():
    w = by_id("tableA3")["N2 -> N4(a)"]
    assert ("a", "1") in w.when
    rep = verify_witness(w)
    assert rep.verdict == "pass"
    assert all(s.verdict in ("pass", "skip") for s in rep.samples)


def test_scaling_to_zero():
    res = scaling_witness(catalog.get("C01"))
    assert res.verdict == "pass"
    assert res.target == Algebra.zero(4)


def test_monotone_sample(witness_reports):
    rep = next(r for r in witness_reports if r.id == "N2 -> N3")
    s = rep.samples[0]
    assert derivation_dim(s.source) < derivation_dim(s.target)
    assert monotone_sample(s, proper=True)


def test_bad_row_index_rejected():
    from nilalg.parsing import ParseError
    with pytest.raises(ParseError):
        parse_witnesses("[X]\nsource: N2\ntarget: N3\nE1 = e1\nE3 = e3\n")
