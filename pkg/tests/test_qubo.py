import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_problem
from oracles import all_states_reversed, energy_double_loop
from qacal.annealer import SampleSet
from qacal.qubo import (ENERGY_TOL, Metrics, QuboProblem, brute_force_ground_state,
                        compute_metrics, dq_ranges, energies, energy, enumerate_states,
                        generate_clique_problem, normalize, num_free, relative_energy,
                        with_ground_energy)


def test_free_element_counts():
    assert [num_free(d) for d in (16, 25, 36)] == [136, 325, 666]


def test_lower_triangle_rejected():
    with pytest.raises(ValueError):
        QuboProblem(np.array([[1.0, 0.0], [0.5, 1.0]]))


def test_flat_order_is_row_major_upper_triangle():
    q = QuboProblem(np.array([[1.0, 2.0, 3.0], [0, 4.0, 5.0], [0, 0, 6.0]]))
    assert list(q.flat()) == [1, 2, 3, 4, 5, 6]
    assert QuboProblem.from_flat(q.flat()) == q


class TestEnergy:
    def test_zero_state(self, rng):
        q = random_problem(rng, 5)
        assert energy(np.zeros(5, dtype=int), q) == 0

    def test_hand_example(self):
        q = QuboProblem(np.array([[1.0, -2.0], [0.0, 1.0]]))
        assert energy([1, 1], q) == 0

    def test_matches_double_loop_exactly(self, rng):
        for _ in range(1000):
            d = int(rng.integers(1, 13))
            q = random_problem(rng, d)
            x = rng.integers(0, 2, size=d)
            assert energy(x, q) == energy_double_loop(x, q.entries)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            energy([1, 0, 1], random_problem(rng, 4))

    def test_batch_agrees(self, rng):
        q = random_problem(rng, 7)
        x = rng.integers(0, 2, size=(50, 7))
        assert np.allclose(energies(x, q), [energy(s, q) for s in x], atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (5, 5), elements=st.floats(-4, 4)),
           st.lists(st.integers(0, 1), min_size=5, max_size=5),
           st.floats(-8, 8))
    def test_linear_in_q(self, m, x, a):
        q = QuboProblem(np.triu(m))
        scaled = QuboProblem(np.triu(m) * a)
        assert energy(x, scaled) == pytest.approx(a * energy(x, q), abs=1e-9)


class TestRelativeEnergy:
    def test_ground_state_is_zero(self, q4):
        state, _ = brute_force_ground_state(q4)
        assert relative_energy(state, q4) == 0.0

    def test_first_excited_gap(self, q4):
        states = all_states_reversed(4)
        es = sorted({energy_double_loop(s, q4.entries) for s in states})
        excited = next(s for s in states if energy_double_loop(s, q4.entries) == es[1])
        assert relative_energy(excited, q4) == pytest.approx(es[1] - es[0], abs=1e-12)

    def test_unknown_ground_energy(self, rng):
        with pytest.raises(ValueError):
            relative_energy([0, 1], random_problem(rng, 2))


class TestNormalize:
    def test_halves(self):
        q = QuboProblem(np.array([[2.0, -1.0], [0.0, 0.5]]))
        n = normalize(q)
        assert np.array_equal(n.entries, q.entries / 2)
        assert n.q_max == 2.0
        assert np.max(np.abs(n.entries)) == 1.0

    def test_idempotent(self):
        q = normalize(QuboProblem(np.array([[2.0, -1.0], [0.0, 0.5]])))
        again = normalize(q)
        assert np.array_equal(again.entries, q.entries) and again.q_max == 1.0

    def test_zero_matrix(self):
        with pytest.raises(ValueError):
            normalize(QuboProblem(np.zeros((3, 3))))


class TestRanges:
    def test_eta_zero(self, q4):
        b = dq_ranges(q4, 0.0)
        assert np.all(b.lower == 0) and np.all(b.upper == 0)

    def test_formula_at_extremes(self):
        q = QuboProblem(np.array([[1.0, -1.0], [0.0, 0.25]]))
        b = dq_ranges(q, 0.05)
        assert b.lower[0] == pytest.approx(-0.1) and b.upper[0] == 0.0
        assert b.lower[1] == 0.0 and b.upper[1] == pytest.approx(0.1)
        assert b.lower[2] == pytest.approx(0.05 * -1.25) and b.upper[2] == pytest.approx(0.05 * 0.75)

    def test_zero_inside_box(self, q8):
        b = dq_ranges(q8, 0.3)
        assert np.all(b.lower <= 0) and np.all(b.upper >= 0)

    @pytest.mark.parametrize("eta", [-0.1, 1.5])
    def test_bad_eta(self, q4, eta):
        with pytest.raises(ValueError):
            dq_ranges(q4, eta)

    def test_unnormalized(self):
        with pytest.raises(ValueError):
            dq_ranges(QuboProblem(np.array([[2.0]])), 0.05)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0, 1))
    def test_corners_stay_normalized(self, seed, eta):
        q = generate_clique_problem(5, "uniform", seed)
        b = dq_ranges(q, eta)
        for corner in (b.lower, b.upper):
            s = q.flat() + corner
            assert np.all(s >= -1.0) and np.all(s <= 1.0)


def _samples(reads, flags=None):
    reads = np.asarray(reads)
    return SampleSet(reads, np.zeros(len(reads)), flags)


class TestMetrics:
    def test_half_at_ground(self, q4):
        g, _ = brute_force_ground_state(q4)
        other = 1 - g
        reads = np.array([g] * 250 + [other] * 250)
        m = compute_metrics(_samples(reads, np.zeros(500, bool)), q4)
        assert m.success_rate == 0.5 and m.num_reads == 500

    def test_all_ground(self, q4):
        g, _ = brute_force_ground_state(q4)
        m = compute_metrics(_samples([g] * 10, np.zeros(10, bool)), q4)
        assert (m.success_rate, m.mean_relative_energy, m.chain_break_fraction) == (1.0, 0.0, 0.0)

    def test_recount(self, q4):
        rng = np.random.default_rng(5)
        reads = rng.integers(0, 2, size=(300, 4))
        flags = rng.random(300) < 0.3
        m = compute_metrics(_samples(reads, flags), q4)
        rel = [energy_double_loop(r, q4.entries) - q4.ground_energy for r in reads]
        assert m.success_rate == sum(abs(r) < ENERGY_TOL for r in rel) / 300
        assert m.mean_relative_energy == pytest.approx(np.mean(rel), abs=1e-12)
        assert m.chain_break_fraction == flags.mean()

    def test_empty(self, q4):
        with pytest.raises(ValueError):
            compute_metrics(_samples(np.zeros((0, 4))), q4)

    def test_unknown_ground_reports_mean_energy(self, rng):
        q = random_problem(rng, 3)
        reads = rng.integers(0, 2, size=(20, 3))
        m = compute_metrics(_samples(reads), q)
        assert m.success_rate is None
        assert m.mean_relative_energy == pytest.approx(np.mean(energies(reads, q)))

    def test_permutation_invariant(self, q4):
        rng = np.random.default_rng(6)
        reads = rng.integers(0, 2, size=(100, 4))
        flags = rng.random(100) < 0.5
        perm = rng.permutation(100)
        a = compute_metrics(_samples(reads, flags), q4)
        b = compute_metrics(_samples(reads[perm], flags[perm]), q4)
        assert a.success_rate == b.success_rate
        assert a.chain_break_fraction == b.chain_break_fraction
        assert a.mean_relative_energy == pytest.approx(b.mean_relative_energy, abs=1e-15)


class TestBruteForce:
    def test_positive_bias(self):
        state, e = brute_force_ground_state(QuboProblem(np.array([[1.0]])))
        assert list(state) == [0] and e == 0

    def test_negative_bias(self):
        state, e = brute_force_ground_state(QuboProblem(np.array([[-1.0]])))
        assert list(state) == [1] and e == -1

    def test_second_enumeration_order(self):
        q = generate_clique_problem(10, "uniform", seed=10)
        state, e = brute_force_ground_state(q)
        exact = [(energy_double_loop(s, q.entries), tuple(s)) for s in all_states_reversed(10)]
        best = min(v for v, _ in exact)
        assert e == best
        assert tuple(state) == min(s for v, s in exact if v == best)

    def test_lexicographic_tie_break(self):
        # x0 and x1 are interchangeable: (0,1) and (1,0) both reach -1
        q = QuboProblem(np.array([[-1.0, 2.0], [0.0, -1.0]]))
        state, e = brute_force_ground_state(q)
        assert list(state) == [0, 1] and e == -1

    def test_too_large(self):
        with pytest.raises(ValueError):
            brute_force_ground_state(QuboProblem(np.zeros((25, 25))))

    def test_lower_than_random_states(self, rng):
        q = generate_clique_problem(12, "uniform", seed=3)
        _, e = brute_force_ground_state(q)
        xs = rng.integers(0, 2, size=(1000, 12))
        assert np.all(e <= energies(xs, q) + 1e-12)

    def test_enumeration_order(self):
        assert enumerate_states(2).tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]


class TestGenerator:
    def test_sizes(self):
        assert generate_clique_problem(16).num_free == 136

    @pytest.mark.parametrize("kind", ["uniform", "frustrated"])
    def test_deterministic_and_normalized(self, kind):
        a = generate_clique_problem(6, kind, seed=9)
        b = generate_clique_problem(6, kind, seed=9)
        assert a == b
        assert np.max(np.abs(a.entries)) == 1.0
        assert np.all(a.flat() != 0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate_clique_problem(4, "spin-glass")

    def test_too_small(self):
        with pytest.raises(ValueError):
            generate_clique_problem(1)


def test_json_round_trip(q4):
    doc = json.loads(q4.dumps())
    assert set(doc) == {"dim", "entries", "q_max", "ground_energy"}
    assert all(len(e) == 3 for e in doc["entries"])
    assert QuboProblem.loads(q4.dumps()) == q4


def test_malformed_json():
    with pytest.raises(ValueError):
        QuboProblem.from_json_dict({"entries": []})
