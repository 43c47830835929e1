import random

import pytest

from conftest import SEEDS, random_invertible, random_nilpotent
from nilalg import catalog, linalg
from nilalg.algebra import Algebra, Subspace
from nilalg.invariants import derivation_dim, find_isomorphism, fingerprint
from nilalg.scalar import GaussRat

ZERO, ONE = GaussRat(0), GaussRat(1)
FLAVORS = ["general", "commutative", "anticommutative"]


def unit(n, k):
    return [ONE if i == k else ZERO for i in range(n)]


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("flavor", FLAVORS)
def test_basis_change_action_law(seed, flavor):
    rng = random.Random(seed)
    for _ in range(10):
        n = rng.randint(2, 4)
        a = random_nilpotent(rng, n, flavor)
        p, q = random_invertible(rng, n), random_invertible(rng, n)
        assert a.change_basis(p).change_basis(q) == a.change_basis(linalg.matmul(p, q))
        assert a.change_basis(linalg.identity(n)) == a


@pytest.mark.parametrize("seed", SEEDS)
def test_change_basis_is_product_transport(seed):
    # e'_i e'_j computed by bilinearity must equal sum_k c'_ij^k e'_k
    rng = random.Random(seed)
    a = random_nilpotent(rng, 4)
    p = random_invertible(rng, 4)
    b = a.change_basis(p)
    cols = linalg.transpose(p)
    for i in range(4):
        for j in range(4):
            lhs = a.multiply(cols[i], cols[j])
            rhs = linalg.matvec(p, list(b.c[i][j]))
            assert lhs == rhs


@pytest.mark.parametrize("seed", SEEDS)
def test_invariants_survive_basis_change(seed):
    rng = random.Random(seed)
    for flavor in FLAVORS:
        a = random_nilpotent(rng, 4, flavor)
        b = a.change_basis(random_invertible(rng, 4))
        assert fingerprint(a) == fingerprint(b)
        assert derivation_dim(a) == derivation_dim(b)
        assert a.flavor() == b.flavor()


def test_flavor_detection():
    a = Algebra.from_products(3, {(0, 0): unit(3, 1), (0, 1): unit(3, 2)}, declared="commutative")
    assert a.flavor() == "commutative" and a.c[1][0][2] == ONE
    assert Algebra.from_products(3, {(0, 1): unit(3, 2)}).flavor() == "general"
    b = Algebra.from_products(3, {(0, 1): unit(3, 2)}, declared="anticommutative")
    assert b.flavor() == "anticommutative" and b.c[1][0][2] == -ONE
    assert Algebra.zero(3).flavor() == "commutative"


def test_anticommutative_rejects_squares():
    with pytest.raises(ValueError):
        Algebra.from_products(2, {(0, 0): unit(2, 1)}, declared="anticommutative")


def test_heisenberg_invariants():
    h = Algebra.from_products(3, {(0, 1): unit(3, 2)}, declared="anticommutative")
    assert h.annihilator() == Subspace(3, [unit(3, 2)])
    assert h.square() == Subspace(3, [unit(3, 2)])
    assert h.nilpotency_index() == 3
    assert derivation_dim(h) == 6


def test_non_nilpotent_detected():
    a = Algebra.from_products(1, {(0, 0): unit(1, 0)})
    assert a.nilpotency_index() is None


def test_c18_power_chain():
    a = catalog.get("C18")
    assert [s.dim for s in a.powers()][:9] == [4, 3, 2, 2, 1, 1, 1, 1, 0]
    assert a.nilpotency_index() == 9


@pytest.mark.parametrize("seed", SEEDS)
def test_find_isomorphism_recovers_random_conjugate(seed):
    rng = random.Random(seed)
    for ident in ("N2", "C11", "C20", "A11"):
        a = catalog.get(ident, catalog.samples(ident)[1] if catalog.entry(ident).is_family else None)
        b = a.change_basis(random_invertible(rng, a.n))
        p = find_isomorphism(a, b, seed=seed)
        assert p is not None and a.change_basis(p) == b


def test_find_isomorphism_separates():
    assert find_isomorphism(catalog.get("C09"), catalog.get("C26")) is None
