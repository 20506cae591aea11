import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qacal.analysis import (bootstrap_performance_curve, embedding_variation_histograms,
                            learning_curve, means_differ, random_directions, random_walk_probe,
                            write_curve_csv, write_histograms_csv, write_walks_csv)
from qacal.annealer import AnnealSchedule, NoiseModel, SimulatedAnnealer
from qacal.chimera import Embedding, EmbeddingError, build_chimera, embed_clique, translate_embedding
from qacal.qubo import QuboProblem, generate_clique_problem, with_ground_energy
from qacal.sampling import CalibrationDataset
from qacal.strategies import argmax_strategy, evaluate_repeated

FAST = AnnealSchedule(100, 0.1, 5.0)


def _ds(values, p=3, seed=0):
    n = len(values)
    x = np.random.default_rng(seed).uniform(-1, 1, (n, p))
    return CalibrationDataset(x, values, np.ones(n) - np.asarray(values), np.zeros(n))


class TestBootstrap:
    @pytest.fixture
    def ds(self):
        return _ds(np.random.default_rng(1).uniform(0.1, 0.4, 500))

    def test_full_size(self, ds):
        pt = bootstrap_performance_curve(ds, [500], reps=50, seed=0)[0]
        assert pt.std == 0 and pt.mean == argmax_strategy(ds).metrics.success_rate

    def test_singletons_average(self, ds):
        pt = bootstrap_performance_curve(ds, [1], reps=4000, seed=0)[0]
        sr = ds.success_rate
        assert abs(pt.mean - sr.mean()) < 4 * sr.std() / np.sqrt(4000)

    def test_monotone_and_bounded(self, ds):
        pts = bootstrap_performance_curve(ds, [1, 10, 100, 500], reps=1000, seed=3)
        means = [p.mean for p in pts]
        assert means == sorted(means)
        assert all(ds.success_rate.min() <= m <= ds.success_rate.max() for m in means)
        assert all(p.repetitions == 1000 and p.std >= 0 for p in pts)

    def test_energy_metric_decreases(self, ds):
        pts = bootstrap_performance_curve(ds, [1, 10, 100], reps=200, seed=3,
                                          metric="mean_relative_energy")
        means = [p.mean for p in pts]
        assert means == sorted(means, reverse=True)

    def test_with_replacement_flag(self, ds):
        pt = bootstrap_performance_curve(ds, [500], reps=20, seed=0, replace=True)[0]
        assert pt.std > 0

    def test_size_too_big(self, ds):
        with pytest.raises(ValueError):
            bootstrap_performance_curve(ds, [501])

    def test_read_only_and_deterministic(self, ds):
        before = ds.success_rate.copy()
        a = bootstrap_performance_curve(ds, [5, 50], reps=30, seed=9)
        assert a == bootstrap_performance_curve(ds, [5, 50], reps=30, seed=9)
        assert np.array_equal(ds.success_rate, before)

    @settings(max_examples=20, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=5, max_size=40), st.integers(0, 100))
    def test_property_monotone(self, values, seed):
        n = len(values)
        pts = bootstrap_performance_curve(_ds(values), sorted({1, n // 2 or 1, n}), reps=20,
                                          seed=seed)
        means = [p.mean for p in pts]
        assert all(a <= b for a, b in zip(means, means[1:]))


class TestLearningCurve:
    def test_affine_targets(self):
        g = np.random.default_rng(2)
        p = 5
        x = g.uniform(-1, 1, (600, p))
        y = x @ g.normal(size=p) + 0.01 * g.normal(size=600)
        ds = CalibrationDataset(x, np.zeros(600), y, np.zeros(600))
        pts = learning_curve(ds, [12, 25, 50], reps=30, seed=0)
        means = [pt.mean for pt in pts]
        assert means == sorted(means) and means[-1] > 0.99

    def test_noise_targets(self):
        g = np.random.default_rng(3)
        ds = CalibrationDataset(g.uniform(-1, 1, (400, 2)), np.zeros(400), g.normal(size=400),
                                np.zeros(400))
        # out-of-sample R^2 of a null model is biased by about -(P+1)/n_train
        for pt in learning_curve(ds, [30, 100, 300], reps=50, seed=1):
            assert -0.2 <= pt.mean <= 0.05

    def test_too_small(self):
        ds = _ds(np.linspace(0, 1, 100))
        with pytest.raises(ValueError):
            learning_curve(ds, [5, 50])


# two variables, identity embedding: the Boltzmann success rate is stationary
# exactly where the planted offset is cancelled
Q_WALK = QuboProblem(np.array([[-0.1, 1.0], [0.0, 0.0]]))
U_WALK = np.array([1.0, 0.0, 2.0]) / np.sqrt(5.0)


@pytest.fixture(scope="module")
def walk_setup():
    g = build_chimera(1, 1)
    return with_ground_energy(Q_WALK), g, Embedding(((0,), (4,)), (1, 1))


class TestWalks:
    def test_planted_peak(self, walk_setup):
        q, g, e = walk_setup
        be = SimulatedAnnealer(g, NoiseModel(systematic=-0.3 * U_WALK, sigma=0.0),
                               AnnealSchedule(200, 0.1, 10.0))
        walk = random_walk_probe(q, be, e, delta=0.05, max_steps=12, repeats=10, reads=200,
                                 seed=1, directions=U_WALK[None])[0]
        peak = walk.arc[np.argmax(walk.mean_sr)]
        assert abs(peak - 0.3) <= 2 * 0.05
        assert walk.mean_sr[-1] < walk.mean_sr.max()

    def test_step_zero_is_baseline(self, walk_setup):
        q, g, e = walk_setup
        be = SimulatedAnnealer(g, NoiseModel.logical(2, sigma=0.01, seed=1), FAST)
        walks = random_walk_probe(q, be, e, num_walks=3, delta=0.02, max_steps=2, repeats=4,
                                  reads=50, seed=5)
        base = evaluate_repeated(q, None, be, e, 4, 50, seed=5)
        for w in walks:
            assert w.mean_sr[0] == base.mean_sr and w.arc[0] == 0

    def test_opposite_directions_differ(self, walk_setup):
        q, g, e = walk_setup
        be = SimulatedAnnealer(g, NoiseModel.logical(2, sigma=0.01, seed=1), FAST)
        u = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
        a, b = random_walk_probe(q, be, e, delta=0.05, max_steps=4, repeats=3, reads=100,
                                 seed=2, directions=u)
        assert not np.array_equal(a.mean_sr[1:], b.mean_sr[1:])

    def test_stops_at_normalization_boundary(self, walk_setup):
        q, g, e = walk_setup
        be = SimulatedAnnealer(g, None, FAST)
        # Q01 = 1 already: the first step along +e_01 leaves [-1, 1]
        w = random_walk_probe(q, be, e, delta=0.1, max_steps=5, repeats=1, reads=10,
                              directions=np.array([[0.0, 1.0, 0.0]]))[0]
        assert w.arc.tolist() == [0.0]

    def test_zero_direction(self, walk_setup):
        q, g, e = walk_setup
        with pytest.raises(ValueError):
            random_walk_probe(q, SimulatedAnnealer(g), e, directions=np.zeros((1, 3)))

    def test_bad_delta(self, walk_setup):
        q, g, e = walk_setup
        with pytest.raises(ValueError):
            random_walk_probe(q, SimulatedAnnealer(g), e, delta=0.0)

    def test_directions_on_sphere(self):
        d = random_directions(36, 200, seed=0)
        assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
        assert np.abs(d.mean(axis=0)).max() < 0.25


@pytest.fixture(scope="module")
def hist_setup():
    g = build_chimera(2, 2)
    q = with_ground_energy(generate_clique_problem(4, "uniform", seed=0))
    e = embed_clique(4, g)
    return g, q, [e, translate_embedding(e, g, (1, 1))]


class TestHistograms:
    def test_deterministic(self, hist_setup):
        g, q, embs = hist_setup
        be = SimulatedAnnealer(g, NoiseModel.physical(g, scale=0.05, sigma=0.01, seed=0), FAST)
        a = embedding_variation_histograms(q, embs[:1], be, samplings=2, experiments=5, reads=40)
        b = embedding_variation_histograms(q, embs[:1], be, samplings=2, experiments=5, reads=40)
        assert np.array_equal(a[0].counts, b[0].counts)
        assert a[0].counts.shape == (2, 20) and a[0].counts.sum() == 10

    def test_invalid_embedding(self, hist_setup):
        g, q, _ = hist_setup
        bad = Embedding(((0,), (0,), (1,), (2,)), (2, 2))
        with pytest.raises(EmbeddingError):
            embedding_variation_histograms(q, [bad], SimulatedAnnealer(g), experiments=1, reads=5)

    def test_csv_outputs(self, hist_setup, tmp_path):
        g, q, embs = hist_setup
        hists = embedding_variation_histograms(q, embs, SimulatedAnnealer(g, None, FAST),
                                               samplings=1, experiments=3, reads=20)
        write_histograms_csv(tmp_path / "h.csv", hists, provenance={"seed": 0})
        rows = [r for r in csv.reader(l for l in open(tmp_path / "h.csv") if not l.startswith("#"))]
        assert rows[0] == ["embedding", "sampling", "bin_lo", "bin_hi", "count"]
        assert len(rows) == 1 + 2 * 20
        assert not means_differ(hists[0], hists[0])


def test_curve_and_walk_csv(tmp_path, walk_setup):
    q, g, e = walk_setup
    pts = bootstrap_performance_curve(_ds(np.linspace(0, 1, 20)), [1, 20], reps=5)
    write_curve_csv(tmp_path / "c.csv", pts)
    lines = [l for l in open(tmp_path / "c.csv") if not l.startswith("#")]
    assert lines[0].strip() == "sample_size,mean_success_rate,std_success_rate,repetitions"
    walks = random_walk_probe(q, SimulatedAnnealer(g, None, FAST), e, num_walks=2, delta=0.01,
                              max_steps=1, repeats=1, reads=10)
    write_walks_csv(tmp_path / "w.csv", walks)
    lines = [l for l in open(tmp_path / "w.csv") if not l.startswith("#")]
    assert len(lines) == 1 + sum(w.arc.size for w in walks)
