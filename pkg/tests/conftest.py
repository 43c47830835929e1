import random
import time

import pytest
from hypothesis import strategies as st

from nilalg import cli
from nilalg.algebra import Algebra
from nilalg.extensions import Cocycle, ExtensionSpec, coboundary_basis, extension_data, h2_basis
from nilalg.scalar import GaussRat

SEEDS = [0, 1, 2]

SMALL = [GaussRat(v) for v in (0, 1, -1, 2, -2, 3)] + [GaussRat(0, 1), GaussRat(1, -1)]


@pytest.fixture(scope="session")
def witness_run():
    start = time.perf_counter()
    reports = cli.run_witnesses(cli.Config())
    return reports, time.perf_counter() - start


@pytest.fixture(scope="session")
def witness_reports(witness_run):
    return witness_run[0]


@pytest.fixture(scope="session")
def certificate_run():
    start = time.perf_counter()
    reports = cli.run_certificates(cli.Config())
    return reports, time.perf_counter() - start


@pytest.fixture(scope="session")
def certificate_reports(certificate_run):
    return certificate_run[0]


def random_matrix(rng: random.Random, n, values=SMALL):
    return [[rng.choice(values) for _ in range(n)] for _ in range(n)]


def random_invertible(rng: random.Random, n):
    from nilalg import linalg
    while True:
        m = random_matrix(rng, n)
        if linalg.det(m):
            return m


def random_nilpotent(rng: random.Random, n, flavor="general"):
    """Strictly upper-triangular products e_i e_j in span(e_k : k > max(i, j))."""
    c = [[[GaussRat(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if flavor == "anticommutative" and i >= j:
                continue
            if flavor == "commutative" and i > j:
                continue
            for k in range(max(i, j) + 1, n):
                c[i][j][k] = rng.choice(SMALL)
            if flavor == "commutative":
                c[j][i] = list(c[i][j])
            if flavor == "anticommutative":
                c[j][i] = [-x for x in c[i][j]]
    return Algebra(c, flavor)


gauss = st.builds(GaussRat, st.integers(-4, 4), st.integers(-4, 4))
gauss_q = st.builds(lambda a, b, d: GaussRat(a) / d + GaussRat(0, b),
                    st.integers(-6, 6), st.integers(-3, 3), st.integers(1, 5))


BASES = ["C01", "C02", "C03", "C04", "A01", "A02"]


def combo(rng, forms, base, flavor):
    n = base.n
    out = Cocycle(base, [[GaussRat(0)] * n for _ in range(n)], flavor)
    for f in forms:
        out = out + f.scale(rng.choice(SMALL))
    return Cocycle(base, out.matrix, flavor)


def random_cocycle(rng, data):
    """A random class combination plus a random coboundary."""
    base = data.base
    reps = [cls.representative for _, cls in h2_basis(base, data.flavor)]
    theta = combo(rng, reps, base, data.flavor)
    bs = [Cocycle(base, b.matrix, data.flavor) for b in coboundary_basis(base)]
    return theta, combo(rng, bs, base, data.flavor)


def random_extension(rng):
    data = extension_data(rng.choice(BASES))
    s = rng.choice([1, 1, 2])
    thetas = []
    for _ in range(s):
        cls, cob = random_cocycle(rng, data)
        thetas.append(Cocycle(data.base, (cls + cob).matrix, data.flavor))
    return data, ExtensionSpec(data.base, thetas)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
