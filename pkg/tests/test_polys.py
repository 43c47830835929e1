import random

import pytest

from conftest import SEEDS
from nilalg.polys import Poly, solve_system
from nilalg.scalar import GaussRat


def xs(n):
    return [Poly.var(n, k) for k in range(n)]


def test_arithmetic_and_substitution():
    x, y = xs(2)
    p = (x + y) * (x - y)
    assert p == x * x - y * y
    assert p.degree() == 2 and p.degree(0) == 2
    q = p.substitute(1, x * 2)
    assert q == x * x * (-3)
    assert p.evaluate([GaussRat(3), GaussRat(1)]) == GaussRat(8)
    assert Poly.const(2, 5).constant() == GaussRat(5) and x.constant() is None


@pytest.mark.parametrize("seed", SEEDS)
def test_solutions_satisfy_system(seed):
    x, y, z = xs(3)
    eqs = [x * y - 1, y * z - x, x * x * x + x * z * (-1)]
    pt = solve_system(eqs, 3, random.Random(seed))
    assert pt is not None
    assert all(not e.evaluate(pt) for e in eqs)


def test_gaussian_roots_of_univariate():
    (x,) = xs(1)
    e = (x - GaussRat(1, -1)) * (x * x + 2)  # 1-i is the only root in Q(i)
    pt = solve_system([e], 1, random.Random(0))
    assert pt == [GaussRat(1, -1)]


def test_forced_value_behind_monomial_factor():
    # x^3 (x + c y) = 0 and x^3 (x^2 + d y) = 0 force x = d / c off the x = 0 branch
    x, y = xs(2)
    c, d = GaussRat(-1, 1), GaussRat(0, 2)
    eqs = [x * x * x * (x + y * c), x * x * x * (x * x + y * d)]
    pt = solve_system(eqs, 2, random.Random(0), accept=lambda p: bool(p[0]))
    assert pt is not None and pt[0] == d / c


def test_accept_rejects_and_inconsistent_gives_none():
    (x,) = xs(1)
    assert solve_system([x * x - 4], 1, random.Random(0), accept=lambda p: p[0] == GaussRat(-2)) == [GaussRat(-2)]
    assert solve_system([x * x - 2], 1, random.Random(0)) is None
    assert solve_system([Poly.const(1, 1)], 1, random.Random(0)) is None
