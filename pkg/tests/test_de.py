import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qacal.de import DEConfig, _distinct_triples, differential_evolution
from qacal.qubo import RangeBounds


def _box(p, lo=-1.0, hi=1.0):
    return RangeBounds(np.full(p, lo), np.full(p, hi))


def sphere(x):
    return np.sum(np.atleast_2d(x) ** 2, axis=1)


def test_degenerate_box():
    b = RangeBounds(np.array([0.2, -0.1]), np.array([0.2, -0.1]))
    res = differential_evolution(lambda x: float(np.sum(x)), b)
    assert np.array_equal(res.x, [0.2, -0.1]) and res.generations == 0
    assert res.fun == pytest.approx(0.1)


@pytest.mark.parametrize("seed", range(3))
def test_sphere(seed):
    res = differential_evolution(sphere, _box(10), DEConfig(seed=seed), vectorized=True)
    assert res.fun < 1e-3 and res.generations <= 300


def test_affine_corner():
    w = np.array([0.5, -2.0, 1.0, -0.1])
    b = RangeBounds(np.array([-1.0, -0.5, 0.0, -3.0]), np.array([1.0, 0.25, 2.0, 3.0]))
    res = differential_evolution(lambda x: x @ w + 1.0, b, DEConfig(seed=1), vectorized=True)
    assert np.array_equal(res.x, np.where(w > 0, b.lower, b.upper))


def test_vectorized_and_scalar_agree():
    cfg = DEConfig(popsize=20, max_generations=30, seed=4)
    a = differential_evolution(sphere, _box(3), cfg, vectorized=True)
    b = differential_evolution(lambda x: float(np.sum(x ** 2)), _box(3), cfg)
    assert np.array_equal(a.x, b.x) and a.fun == b.fun


def test_deterministic():
    cfg = DEConfig(seed=9, max_generations=20)
    a = differential_evolution(sphere, _box(5), cfg, vectorized=True)
    b = differential_evolution(sphere, _box(5), cfg, vectorized=True)
    assert np.array_equal(a.x, b.x)


def test_default_population():
    assert DEConfig().population(5) == 75
    assert DEConfig().population(666) == 600
    assert DEConfig(popsize=8).population(100) == 8


@pytest.mark.parametrize("kw", [dict(mutation=0.0), dict(mutation=2.5), dict(crossover=1.1),
                                dict(popsize=3), dict(max_generations=0), dict(tol=-1.0)])
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        DEConfig(**kw)


def test_infinite_bounds():
    with pytest.raises(ValueError):
        differential_evolution(sphere, RangeBounds(np.array([-np.inf]), np.array([1.0])))


def test_init_shape_checked():
    with pytest.raises(ValueError):
        differential_evolution(sphere, _box(2), DEConfig(popsize=6), init=np.zeros((5, 2)))


def test_triples_are_distinct():
    idx = _distinct_triples(np.random.default_rng(0), 7)
    for i, row in enumerate(idx):
        assert len({i, *row}) == 4


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 6))
def test_inside_box_and_never_worse(seed, dim):
    g = np.random.default_rng(seed)
    lo = g.uniform(-2, 0, dim)
    b = RangeBounds(lo, lo + g.uniform(0.1, 2, dim))
    center = g.uniform(-3, 3, dim)
    obj = lambda x: np.sum((np.atleast_2d(x) - center) ** 2, axis=1)
    res = differential_evolution(obj, b, DEConfig(popsize=12, max_generations=25, seed=seed),
                                 vectorized=True)
    assert np.all(res.x >= b.lower) and np.all(res.x <= b.upper)
    assert res.fun <= res.initial_best
