import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SEEDS, random_matrix
from nilalg import linalg
from nilalg.parsing import NonExactValue, ParseError, Vec, evaluate_text
from nilalg.scalar import GaussRat, TExpr

ZERO, ONE = GaussRat(0), GaussRat(1)


def test_arithmetic_and_names():
    assert evaluate_text("2*a^2 - i/3", {"a": GaussRat(3)}) == GaussRat(18) - GaussRat(0, 1) / 3
    assert evaluate_text("(1+i)^2", {}) == GaussRat(0, 2)
    assert evaluate_text("sqrt(-4)", {}) == GaussRat(0, 2)


def test_basis_expression():
    env = {"t": TExpr.t(), "e1": Vec.unit(0), "e3": Vec.unit(2)}
    v = evaluate_text("t e1 - 1/2t^(-1) e3", env)
    assert v.coords[0] == TExpr.t()
    assert v.coords[2] == TExpr.monomial(GaussRat(-1) / 2, -1)


@pytest.mark.parametrize("text", ["2*", "(1+2", "x+1", "rad(2;1)"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        evaluate_text(text, {})


def test_inexact_root():
    with pytest.raises(NonExactValue):
        evaluate_text("sqrt(2)", {})


@pytest.mark.parametrize("seed", SEEDS)
def test_rank_nullity(seed):
    rng = random.Random(seed)
    for _ in range(30):
        rows, cols = rng.randint(1, 5), rng.randint(1, 5)
        m = [[rng.choice([ZERO, ZERO, ONE, -ONE, GaussRat(2), GaussRat(0, 1)]) for _ in range(cols)]
             for _ in range(rows)]
        ker = linalg.nullspace(m, cols)
        assert linalg.rank(m) + len(ker) == cols
        for v in ker:
            assert all(x == 0 for x in linalg.matvec(m, v))


@pytest.mark.parametrize("seed", SEEDS)
def test_inverse_det_adjugate(seed):
    rng = random.Random(seed)
    for _ in range(20):
        n = rng.randint(1, 4)
        m = random_matrix(rng, n)
        d = linalg.det(m)
        adj = linalg.adjugate(m)
        prod = linalg.matmul(m, adj)
        assert prod == [[d if i == j else ZERO for j in range(n)] for i in range(n)]
        if d:
            assert linalg.matmul(m, linalg.inverse(m)) == linalg.identity(n)


@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_solve_consistent_system(x):
    a = [[GaussRat(1), GaussRat(2), GaussRat(0)], [GaussRat(0), GaussRat(1), GaussRat(0, 1)],
         [GaussRat(1), GaussRat(0), GaussRat(1)]]
    xs = [GaussRat(v) for v in x]
    b = linalg.matvec(a, xs)
    sol = linalg.solve(a, b)
    assert linalg.matvec(a, sol) == b
