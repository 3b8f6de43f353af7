from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdqubo.errors import DimensionError, DomainError, SizeError
from pdqubo.model import (
    ENUMERATION_CAP,
    IsingModel,
    QuboModel,
    argmin_exhaustive,
    as_fraction,
    evaluate_ising,
    evaluate_qubo,
    index_to_bits,
    ising_to_qubo,
    logical_graph,
    qubo_to_ising,
)
from support import all_states, ising_models, qubo_models, random_qubo


def naive_argmin(model):
    # first state in enumeration order (x_0 least significant) with minimal exact energy
    n = model.num_vars
    best = None
    for i in range(1 << n):
        x = index_to_bits(i, n)
        e = evaluate_qubo(model, x)
        if best is None or e < best[1]:
            best = (x, e)
    return best


class TestCanonical:
    def test_diagonal_terms_fold_into_linear(self):
        q = QuboModel(2, {0: 1}, {(0, 0): 2, (1, 0): 3, (0, 1): -3})
        assert dict(q.linear) == {0: 3}
        assert dict(q.quadratic) == {}

    def test_reversed_keys_merge(self):
        q = QuboModel(3, {}, {(2, 1): Fraction(1, 2), (1, 2): Fraction(1, 4)})
        assert dict(q.quadratic) == {(1, 2): Fraction(3, 4)}

    def test_float_coefficients_use_shortest_decimal(self):
        assert as_fraction(0.1) == Fraction(1, 10)
        assert QuboModel(1, {0: 0.3}).linear[0] == Fraction(3, 10)

    @pytest.mark.parametrize("bad", [True, float("nan"), float("inf"), "x", None])
    def test_rejects_non_numbers(self, bad):
        with pytest.raises(DomainError):
            as_fraction(bad)

    def test_index_out_of_range(self):
        with pytest.raises(DomainError):
            QuboModel(2, {2: 1})
        with pytest.raises(DomainError):
            QuboModel(-1)

    def test_equality_ignores_construction_order(self):
        a = QuboModel(3, {0: 1, 2: -1}, {(0, 1): 2})
        b = QuboModel(3, {2: -1, 0: 1}, {(1, 0): 2})
        assert a == b

    def test_addition_and_scaling(self):
        a = QuboModel(2, {0: 1}, {(0, 1): 2}, 1)
        b = QuboModel(2, {0: -1, 1: 1}, {}, 1)
        assert a + b == QuboModel(2, {1: 1}, {(0, 1): 2}, 2)
        assert a.scaled(Fraction(1, 2)) == QuboModel(2, {0: Fraction(1, 2)}, {(0, 1): 1}, Fraction(1, 2))
        with pytest.raises(DimensionError):
            a + QuboModel(3)

    def test_to_numpy_is_upper_triangular(self):
        h, J, off = QuboModel(3, {1: 2}, {(2, 0): -1}, 0.5).to_numpy()
        assert h.tolist() == [0, 2, 0]
        assert J[0, 2] == -1 and J[2, 0] == 0
        assert off == 0.5


class TestEvaluate:
    def test_known_energy(self):
        q = QuboModel(3, {0: 1, 1: -2}, {(0, 1): 3, (1, 2): Fraction(1, 3)}, 5)
        assert evaluate_qubo(q, (1, 1, 0)) == 7
        assert evaluate_qubo(q, (0, 1, 1)) == 3 + Fraction(1, 3)

    def test_bad_assignments(self):
        q = QuboModel(2)
        with pytest.raises(DimensionError):
            evaluate_qubo(q, (0,))
        with pytest.raises(DomainError):
            evaluate_qubo(q, (0, 2))
        with pytest.raises(DomainError):
            evaluate_ising(IsingModel(1), (0,))

    def test_ising_self_coupling_is_constant(self):
        m = IsingModel(2, {}, {(1, 1): 3})
        assert m.offset == 3 and not m.couplings


class TestTransforms:
    def test_single_variable(self):
        ising = qubo_to_ising(QuboModel(1, {0: 1}))
        assert ising == IsingModel(1, {0: Fraction(1, 2)}, {}, Fraction(1, 2))

    def test_coupling(self):
        ising = qubo_to_ising(QuboModel(2, {}, {(0, 1): 4}))
        assert ising == IsingModel(2, {0: 1, 1: 1}, {(0, 1): 1}, 1)

    @given(qubo_models(max_vars=6))
    def test_qubo_to_ising_preserves_energy(self, q):
        ising = qubo_to_ising(q)
        for x in all_states(q.num_vars):
            assert evaluate_ising(ising, [2 * b - 1 for b in x]) == evaluate_qubo(q, x)

    @given(ising_models(max_vars=6))
    def test_round_trip_is_identity(self, ising):
        assert qubo_to_ising(ising_to_qubo(ising)) == ising

    @given(qubo_models(max_vars=6))
    def test_round_trip_from_qubo(self, q):
        assert ising_to_qubo(qubo_to_ising(q)) == q


def test_logical_graph():
    g = logical_graph(QuboModel(3, {0: 1}, {(0, 2): -1}))
    assert g.nodes == ((0, 1), (1, 0), (2, 0))
    assert g.edges == ((0, 2, -1),)
    assert g.adjacency() == {0: {2}, 1: set(), 2: {0}}


class TestArgmin:
    @settings(max_examples=60, deadline=None)
    @given(qubo_models(max_vars=8, min_vars=1))
    def test_matches_naive_enumeration(self, q):
        assert argmin_exhaustive(q) == naive_argmin(q)

    def test_tie_goes_to_first_in_enumeration_order(self):
        # x0 xor-ish: 10 and 01 tie; 10 (x0=1) has index 1, 01 has index 2
        q = QuboModel(2, {0: -1, 1: -1}, {(0, 1): 2})
        assert argmin_exhaustive(q) == ((1, 0), -1)
        assert argmin_exhaustive(QuboModel(5))[0] == (0,) * 5

    def test_empty_model(self):
        assert argmin_exhaustive(QuboModel(0, offset=3)) == ((), 3)

    def test_cap(self):
        with pytest.raises(SizeError):
            argmin_exhaustive(QuboModel(ENUMERATION_CAP + 1))
        with pytest.raises(SizeError):
            argmin_exhaustive(QuboModel(5), cap=4)

    def test_near_ties_resolved_exactly(self):
        # energies differ far below float resolution of the scale
        tiny = Fraction(1, 10**30)
        q = QuboModel(3, {0: 1 + tiny, 1: 1, 2: 5}, {}, 0).scaled(-1)
        assert argmin_exhaustive(q)[0] == (1, 1, 1)
        q = QuboModel(2, {0: -1, 1: -1 - tiny}, {(0, 1): 10})
        assert argmin_exhaustive(q) == ((0, 1), -1 - tiny)

    @pytest.mark.parametrize("n", [13, 23])
    def test_planted_optimum_across_chunks(self, n):
        # separable model: optimum sets exactly the negative fields
        rng = np.random.default_rng(n)
        target = rng.integers(0, 2, n)
        target[-1] = 1  # forces the optimum into the last high-bit chunk
        h = {i: Fraction(int(rng.integers(1, 100)), 7) * (-1 if b else 1) for i, b in enumerate(target)}
        state, energy = argmin_exhaustive(QuboModel(n, h))
        assert state == tuple(int(b) for b in target)
        assert energy == sum(c for c in h.values() if c < 0)

    def test_dense_models_against_naive(self):
        rng = np.random.default_rng(5)
        for n in (9, 12, 14):
            q = random_qubo(rng, n)
            if n <= 12:
                assert argmin_exhaustive(q) == naive_argmin(q)
            else:
                state, energy = argmin_exhaustive(q)
                assert energy == evaluate_qubo(q, state)
                # single flips never improve a global minimum
                for i in range(n):
                    flipped = list(state)
                    flipped[i] ^= 1
                    assert evaluate_qubo(q, flipped) >= energy


@given(st.integers(0, 2**10 - 1))
def test_index_to_bits_little_endian(i):
    bits = index_to_bits(i, 10)
    assert sum(b << k for k, b in enumerate(bits)) == i
