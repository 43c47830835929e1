import pytest

from nilalg import catalog, graphs
from nilalg.degeneration import Report, SampleResult


def test_dot_is_valid_and_complete():
    for figure in catalog.FIGURES:
        dot = graphs.to_dot(figure)
        parsed = graphs.parse_dot(dot)
        assert parsed["directed"]
        for e in catalog.edges(figure):
            assert (e.source, e.target) in {(s, t) for s, t, *_ in parsed["edges"]}


def test_dot_levels():
    levels = lambda f: sorted(set(graphs.figure_levels(f).values()), reverse=True)
    assert levels("A2") == [8, 7, 6, 5, 4, 3, 0]
    assert levels("B2")[0] == 15
    assert levels("anticommutative") == [19, 18, 17, 16, 15, 14, 13, 10, 9, 0]
    # level = codimension of the orbit, n^2 - dim Der (printed values)
    assert graphs.figure_levels("A2")["N2"] == 9 - 1


def test_dot_marks_rigid_nodes():
    dot = graphs.to_dot("A2", rigid={"N2"})
    line = next(l for l in dot.splitlines() if l.strip().startswith('"N2"') or l.strip().startswith("N2 "))
    assert "peripheries=2" in line


@pytest.mark.parametrize("bad", [
    "digraph { a -> }",
    "digraph g { a -> b",
    "graph g { a -> b }",
    "digraph g { a [label=] }",
])
def test_parse_dot_rejects(bad):
    with pytest.raises(graphs.DotError):
        graphs.parse_dot(bad)


def test_preorder_maximal_elements():
    po = graphs.Preorder()
    po.add("x", "y", "r1")
    po.add("y", "z", "r2")
    po.add("w", "z", "r3")
    assert sorted(graphs.maximal_elements(po)) == ["w", "x"]
    po.add("y", "x", "r4")  # x ~ y: both maximal
    assert sorted(graphs.maximal_elements(po)) == ["w", "x", "y"]


def test_rigidity(witness_reports):
    by_id = {r.id: r for r in witness_reports}
    results = graphs.rigidity_report(by_id)
    assert {r.variety: sorted(r.maximal) for r in results} == {
        "nilpotent3": ["N2"], "commutative4": ["C19(*)"], "anticommutative5": ["A11"]}
    assert all(r.ok for r in results)
    text = graphs.format_rigidity(results)
    assert text.count("[ok]") == 3


def test_figures_supported_by_witnesses(witness_reports):
    by_id = {r.id: r for r in witness_reports}
    for v in graphs.VARIETIES.values():
        po, failed = graphs.build_preorder(v, by_id)
        assert failed == []
        assert graphs.unsupported_edges(v.figure, po) == []


def test_consistency(witness_reports, certificate_reports):
    res = graphs.consistency(witness_reports, certificate_reports)
    assert res.conflicts == []
    assert [pair for pair, *_ in res.remarks] == [("C09", "C26"), ("C26", "C08")]
    assert res.ok


def test_consistency_detects_conflict(witness_reports, certificate_reports):
    fake = Report("C12 -> C26", "degeneration", "pass", "exact", {},
                  [SampleResult("", "pass", source=catalog.get("C12"), target=catalog.get("C26"))])
    res = graphs.consistency(list(witness_reports) + [fake], certificate_reports)
    assert any(s == "C12" and t == "C26" for s, t, _ in res.conflicts)
    assert not res.ok


def test_remark_needs_derivation(witness_reports, certificate_reports):
    kept = [r for r in certificate_reports if not r.id.endswith(" -/-> C26")]
    res = graphs.consistency(witness_reports, kept)
    (pair, free, how), _ = res.remarks
    assert pair == ("C09", "C26") and free and how is None
