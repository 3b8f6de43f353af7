"""Shared generators for the test suite."""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import numpy as np
from hypothesis import strategies as st

from pdqubo.diagrams import PersistenceDiagram
from pdqubo.model import IsingModel, QuboModel


def random_diagram(rng: np.random.Generator, k: int) -> PersistenceDiagram:
    """``k`` points uniform in the unit square, rejecting death <= birth."""
    pts = []
    while len(pts) < k:
        b, d = rng.random(2)
        if d > b:
            pts.append((float(b), float(d)))
    return PersistenceDiagram.from_pairs(pts)


def random_pair(rng, max_points=4, max_vars=None, nonempty=False):
    lo = 1 if nonempty else 0
    while True:
        m, n = int(rng.integers(lo, max_points + 1)), int(rng.integers(lo, max_points + 1))
        if max_vars is None or m * n + m + n <= max_vars:
            return random_diagram(rng, m), random_diagram(rng, n)


def random_qubo(rng, n: int, density: float = 0.6, scale: int = 1000) -> QuboModel:
    """Coefficients uniform on a 1/scale grid in [-1, 1]."""
    def coeff():
        return Fraction(int(rng.integers(-scale, scale + 1)), scale)

    linear = {i: coeff() for i in range(n)}
    quadratic = {(i, j): coeff() for i in range(n) for j in range(i + 1, n) if rng.random() < density}
    return QuboModel(n, linear, quadratic, coeff())


def all_states(n: int):
    return list(product((0, 1), repeat=n))


small_fraction = st.fractions(min_value=-4, max_value=4, max_denominator=12)


@st.composite
def qubo_models(draw, max_vars=6, min_vars=0):
    n = draw(st.integers(min_vars, max_vars))
    idx = st.integers(0, max(n - 1, 0))
    terms = draw(st.lists(st.tuples(idx, idx, small_fraction), max_size=3 * n)) if n else []
    linear, quadratic = {}, {}
    for i, j, c in terms:
        if i == j:
            linear[i] = linear.get(i, 0) + c
        else:
            quadratic[(i, j)] = quadratic.get((i, j), 0) + c
    return QuboModel(n, linear, quadratic, draw(small_fraction))


@st.composite
def ising_models(draw, max_vars=6):
    n = draw(st.integers(1, max_vars))
    fields = {i: draw(small_fraction) for i in range(n)}
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    couplings = {(i, j): draw(small_fraction) for i, j in pairs if i != j}
    return IsingModel(n, fields, couplings, draw(small_fraction))


coordinate = st.fractions(min_value=0, max_value=2, max_denominator=8)


@st.composite
def diagrams(draw, max_points=3):
    pts = []
    for _ in range(draw(st.integers(0, max_points))):
        b = draw(coordinate)
        life = draw(st.fractions(min_value=Fraction(1, 8), max_value=2, max_denominator=8))
        pts.append((b, b + life))
    return PersistenceDiagram.from_pairs(pts)


def reverse_calibration_instance():
    """m = n = 2 instance used to freeze the reverse-anneal recovery rate."""
    rng = np.random.default_rng(0)
    return random_diagram(rng, 2), random_diagram(rng, 2)


# recovered reads out of 100 when calibrated (default reverse schedule, seed 0)
REVERSE_CALIBRATED_HITS = 100


def histogram_instance():
    """m = n = 3 instance whose optimal matching is the most sampled one."""
    rng = np.random.default_rng(101)
    return random_diagram(rng, 3), random_diagram(rng, 3)


HISTOGRAM_SEED = 1
