import shutil

import pytest

from nilalg import catalog
from nilalg.algebra import Algebra
from nilalg.scalar import GaussRat, ParamRat, TExpr


@pytest.fixture
def data_copy(tmp_path):
    dst = tmp_path / "data"
    shutil.copytree(catalog.data_dir(), dst)
    catalog.set_data_dir(dst)
    yield dst
    catalog.set_data_dir(None)


def test_entry_counts():
    real = lambda d: [e for e in catalog.entries(d) if not e.id.startswith("ZERO")]
    assert len(real(3)) == 8
    assert len(real(4)) == 30
    assert len(real(5)) == 11


def test_checksums_pinned():
    assert catalog.verify_checksums() == []


def test_checksum_mismatch_detected(data_copy):
    path = data_copy / "commutative4.alg"
    path.write_text(path.read_text().replace("e1 e1 = e3, e2 e2 = e4", "e1 e1 = e3, e2 e2 = 2 e4"))
    assert catalog.verify_checksums() == ["commutative4.alg"]
    assert catalog.get("C06").c[1][1][3] == GaussRat(2)


def test_family_domain():
    assert catalog.entry("C19").domain == "C>=0"
    catalog.get("C19", GaussRat(0, 1))
    with pytest.raises(catalog.DomainError):
        catalog.get("C19", GaussRat(-1))
    # build ignores the domain, as parametric indices need
    assert catalog.build("C19", GaussRat(-1)).n == 4


def test_parameter_forms():
    assert catalog.get("N4", {"a": 2}) == catalog.get("N4", GaussRat(2))
    sym = catalog.build("C20", ParamRat.variable())
    assert sym.n == 4
    idx = catalog.build("C19", "t^2")
    assert any(isinstance(x, TExpr) for plane in idx.c for row in plane for x in row)
    with pytest.raises(ValueError):
        catalog.get("N1", 2)
    with pytest.raises(ValueError):
        catalog.build("N4")


def test_every_entry_is_nilpotent_and_flavored():
    for ent in catalog.entries():
        for v in (catalog.samples(ent.id) if ent.is_family else [None]):
            a = catalog.get(ent.id, v)
            assert a.nilpotency_index() is not None
            if ent.flavor != "general":
                assert a.flavor() == ent.flavor or a.is_zero_product()


def test_zero_algebras():
    for n in (3, 4, 5):
        assert catalog.get(f"ZERO{n}") == Algebra.zero(n)


def test_bases_for_extensions():
    assert catalog.base("C01").n == 3
    assert catalog.base("A02").n == 4


def test_figures():
    a2 = catalog.edges("A2")
    assert all(isinstance(e, catalog.GraphEdge) for e in a2)
    assert any(e.source == "C20" and e.target == "C26" and e.label for e in catalog.edges("B2"))
    with pytest.raises(KeyError):
        catalog.edges("Z9")


def test_read_blocks():
    blocks = catalog.read_blocks("# c\n[X]\nkey: v\nline one\n\n[Y]\nother: w\n")
    assert [b.title for b in blocks] == ["X", "Y"]
    assert blocks[0].get("key") == "v" and blocks[0].body == ["line one"]
