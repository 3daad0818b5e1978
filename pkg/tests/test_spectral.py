"""Stationary frequencies and the perfect-knowledge error floor."""

import random
from fractions import Fraction

import numpy as np
import pytest

from mealypred import (
    KnownStatePredictor,
    MealyMachine,
    adjacency,
    evaluate_exhaustive,
    normalized_matrix,
    perfect_knowledge_error_bound,
    stationary_frequencies,
)
from mealypred.enumeration import is_strongly_connected
from mealypred.machines import random_machine, ring_machine

import oracles


class TestAdjacency:
    def test_ring_rows(self):
        m = ring_machine("0010")
        adj = adjacency(m)
        for i in range(4):
            assert adj[i][(i + 1) % 4] == 2
            assert sum(adj[i]) == 2

    def test_self_loop_and_exit(self):
        m = MealyMachine(2, ((0, 1), (1, 1)), ((0, 0), (0, 0)))
        assert adjacency(m)[0] == (1, 1)

    def test_demo8_first_row(self, demo8):
        row = adjacency(demo8)[0]
        assert row[1] == 1 and row[2] == 1 and sum(row) == 2

    def test_rows_stochastic_exact(self):
        rng = random.Random(0)
        for _ in range(20):
            m = random_machine(rng.randint(1, 6), rng)
            for row in normalized_matrix(m):
                assert sum(row) == Fraction(1)


class TestStationary:
    def test_ring_uniform_despite_periodicity(self):
        for k in range(1, 7):
            sv = stationary_frequencies(ring_machine("0" * k))
            assert sv.method in ("eigen", "cesaro")
            assert sv.weights == pytest.approx([1 / k] * k, abs=1e-12)

    def test_echo_half_half_vs_enumeration(self, echo):
        sv = stationary_frequencies(echo)
        emp = oracles.visit_frequencies(echo, 16)
        assert sv.weights == pytest.approx(list(emp), abs=1e-12)
        assert sv.weights == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_absorbing_state_takes_all(self, absorbing_machine):
        sv = stationary_frequencies(absorbing_machine)
        assert sv.weights == pytest.approx([0.0, 0.0, 1.0], abs=1e-9)

    def test_unreachable_states_get_zero(self):
        m = MealyMachine(3, ((0, 1), (0, 1), (2, 2)), ((0, 1), (1, 0), (0, 0)))
        sv = stationary_frequencies(m)
        assert sv.weights[2] == 0.0

    def test_fixed_point_for_irreducible_aperiodic(self):
        rng = random.Random(5)
        n_checked = 0
        while n_checked < 25:
            m = random_machine(rng.randint(2, 6), rng)
            if not is_strongly_connected(m):
                continue
            sv = stationary_frequencies(m)
            if sv.method != "eigen":
                continue  # periodic structure; fixed point still checked below
            n = np.zeros((m.num_states, m.num_states))
            for s in range(m.num_states):
                for b in (0, 1):
                    n[s, m.transition[s][b]] += 0.5
            v = np.array(sv.weights)
            assert np.max(np.abs(v @ n - v)) < 1e-9
            n_checked += 1

    def test_matched_horizon_average_equals_enumeration(self):
        # the T-step running average is exactly the all-input visit frequency
        rng = random.Random(11)
        machines = [ring_machine("0" * k) for k in (2, 3, 5)]
        machines += [random_machine(rng.randint(2, 6), rng) for _ in range(10)]
        for m in machines:
            sv = stationary_frequencies(m, tolerance=0.0, max_iterations=14)
            assert sv.method == "empirical"
            emp = oracles.visit_frequencies(m, 14)
            assert np.max(np.abs(np.array(sv.weights) - emp)) < 1e-12

    def test_nonconvergence_is_flagged_not_silent(self):
        sv = stationary_frequencies(ring_machine("01"), tolerance=0.0, max_iterations=9)
        assert sv.method == "empirical"
        assert sv.iterations == 9
        assert sv.residual > 0

    def test_rejects_bad_arguments(self, echo):
        with pytest.raises(ValueError):
            stationary_frequencies(echo, tolerance=-1.0)
        with pytest.raises(ValueError):
            stationary_frequencies(echo, max_iterations=0)


class TestBound:
    def test_all_biased_machine_bound_zero(self, alt_ring):
        sv = stationary_frequencies(alt_ring)
        assert perfect_knowledge_error_bound(alt_ring, sv) == 0.0

    def test_echo_bound_half_matches_enumeration(self, echo):
        sv = stationary_frequencies(echo)
        bound = perfect_knowledge_error_bound(echo, sv)
        assert bound == pytest.approx(0.5, abs=1e-12)
        e = evaluate_exhaustive(echo, KnownStatePredictor(echo), 12).e_ave
        assert e == Fraction(1, 2)

    def test_half_biased_ring_bound_quarter(self, half_biased_ring):
        sv = stationary_frequencies(half_biased_ring)
        bound = perfect_knowledge_error_bound(half_biased_ring, sv)
        assert bound == pytest.approx(0.25, abs=1e-12)
        e = evaluate_exhaustive(half_biased_ring, KnownStatePredictor(half_biased_ring), 12).e_ave
        assert e == Fraction(1, 4)

    def test_known_state_error_equals_exact_chain_law(self):
        # dual route: enumeration engine vs exact distribution recursion
        rng = random.Random(23)
        for _ in range(25):
            m = random_machine(rng.randint(1, 4), rng)
            t = rng.randint(1, 9)
            lhs = evaluate_exhaustive(m, KnownStatePredictor(m), t).e_ave
            assert lhs == oracles.dp_known_state_error(m, t)
