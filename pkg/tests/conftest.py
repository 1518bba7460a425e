"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately avoid the library's evaluation code: they loop
over +-1 spins with ``itertools.product`` and use plain ``math``/``numpy``.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from qwgt_lab.gf2 import Gf2Matrix, Gf2Vector
from qwgt_lab.graph import Graph, random_multigraph

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# --- oracles -------------------------------------------------------------------


def brute_partition(G: Graph, w: Gf2Vector, beta_j: float, field_signs: Gf2Vector | None = None) -> float:
    """sum over sigma in {+-1}^V of exp(-beta H), optional field B_i = (-1)^f_i J."""
    total = 0.0
    terms = []
    for sigma in itertools.product((1, -1), repeat=G.num_vertices):
        x = 0
        for e, (i, j) in enumerate(G.edges):
            x += (-1) ** w[e] * sigma[i] * sigma[j]
        if field_signs is not None:
            for i in range(G.num_vertices):
                x += (-1) ** field_signs[i] * sigma[i]
        terms.append(math.exp(beta_j * x))
    total = math.fsum(terms)
    return total


def brute_qwgt(A: Gf2Matrix, B: Gf2Matrix, x, y):
    """Term-by-term S(A, B, x, y) over {0,1}^n."""
    n = A.ncols
    total = 0 * x * y
    for b in itertools.product((0, 1), repeat=n):
        if any(sum(A[i, j] * b[j] for j in range(n)) % 2 for i in range(A.nrows)):
            continue
        q = sum(b[i] * B[i, j] * b[j] for i in range(n) for j in range(n)) % 2
        k = sum(b)
        total += (-1) ** q * x**k * y ** (n - k)
    return total


def transfer_matrix_chain(n: int, w: Gf2Vector, beta_j: float, periodic: bool) -> float:
    """Z of a spin chain from 2x2 bond transfer matrices."""
    bonds = n if periodic else n - 1
    M = np.eye(2)
    spins = (1, -1)
    for e in range(bonds):
        q = (-1) ** w[e]
        T = np.array([[math.exp(beta_j * q * a * b) for b in spins] for a in spins])
        M = M @ T
    if periodic:
        return float(np.trace(M))
    return float(M.sum())


# --- random instances ------------------------------------------------------------


def random_vector(rng: random.Random, n: int) -> Gf2Vector:
    return Gf2Vector(rng.getrandbits(n) if n else 0, n)


def random_matrix(rng: random.Random, m: int, n: int, density: float = 0.5) -> Gf2Matrix:
    rows = [[1 if rng.random() < density else 0 for _ in range(n)] for _ in range(m)]
    return Gf2Matrix.from_rows(rows, n)


def random_graph(rng: random.Random, vmin: int = 2, vmax: int = 10, emax: int = 16) -> Graph:
    V = rng.randint(vmin, vmax)
    E = rng.randint(0, emax)
    return random_multigraph(rng, V, E)


def random_rational(rng: random.Random, lo: Fraction, hi: Fraction, den: int = 17) -> Fraction:
    d = rng.randint(1, den)
    a = math.ceil(lo * d)
    b = math.floor(hi * d)
    return Fraction(rng.randint(a, b), d)


# tanh values whose bond factor sqrt((1+lam)/(1-lam)) is rational: 2, 3/2, 5/3, 4/3, 7/3
PYTHAGOREAN_LAMBDAS = (Fraction(3, 5), Fraction(5, 13), Fraction(8, 17), Fraction(7, 25), Fraction(20, 29))


@pytest.fixture
def rng():
    return random.Random(20261018)
