"""Box-constrained differential evolution (rand/1/bin)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .qubo import RangeBounds


@dataclass(frozen=True)
class DEConfig:
    popsize: Optional[int] = None  # default 15 * min(dim, 40)
    mutation: float = 0.8
    crossover: float = 0.9
    max_generations: int = 300
    tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.mutation <= 2:
            raise ValueError("mutation factor F must lie in (0, 2]")
        if not 0 <= self.crossover <= 1:
            raise ValueError("crossover rate CR must lie in [0, 1]")
        if self.popsize is not None and self.popsize < 4:
            raise ValueError("population must hold at least 4 members")
        if self.max_generations < 1:
            raise ValueError("need at least one generation")
        if self.tol < 0:
            raise ValueError("tolerance must be non-negative")

    def population(self, dim: int) -> int:
        if self.popsize is not None:
            return self.popsize
        return max(4, min(600, 15 * min(dim, 40)))


@dataclass(frozen=True)
class DEResult:
    x: np.ndarray
    fun: float
    generations: int
    evaluations: int
    initial_best: float


def _evaluate(objective, pop, vectorized):
    if vectorized:
        return np.asarray(objective(pop), dtype=float).reshape(pop.shape[0])
    return np.array([float(objective(p)) for p in pop])


def _distinct_triples(rng, n):
    """For each member ``i`` three distinct indices, all different from ``i``."""
    idx = np.empty((n, 3), dtype=np.int64)
    me = np.arange(n)
    todo = me
    while todo.size:
        draw = rng.integers(0, n - 1, size=(todo.size, 3))
        draw += draw >= todo[:, None]  # skip self
        ok = (draw[:, 0] != draw[:, 1]) & (draw[:, 0] != draw[:, 2]) & (draw[:, 1] != draw[:, 2])
        idx[todo[ok]] = draw[ok]
        todo = todo[~ok]
    return idx


def differential_evolution(objective: Callable, bounds: RangeBounds,
                           config: Optional[DEConfig] = None, vectorized: bool = False,
                           init: Optional[np.ndarray] = None) -> DEResult:
    """Minimize ``objective`` over the box.

    Each generation forms ``v = a + F (b - c)`` from three random distinct
    members, mixes it into the target by binomial crossover (one coordinate
    always taken from ``v``), clips to the box and keeps the trial when it is
    no worse.  Stops after ``max_generations`` or once the spread of
    population values falls below ``tol``.  With ``vectorized=True`` the
    objective receives the whole ``(n, dim)`` population at once.
    """
    cfg = config or DEConfig()
    lo, hi = bounds.lower, bounds.upper
    dim = lo.size
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("bounds must be finite")
    if np.all(lo == hi):
        x = lo.copy()
        val = float(_evaluate(objective, x[None], vectorized)[0])
        return DEResult(x, val, 0, 1, val)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.population(dim)
    if init is None:
        strata = rng.permuted(np.tile(np.arange(n), (dim, 1)), axis=1).T
        pop = lo + (hi - lo) * (strata + rng.random((n, dim))) / n
    else:
        pop = np.array(init, dtype=float)
        if pop.shape != (n, dim):
            raise ValueError(f"initial population must have shape {(n, dim)}")
    pop = np.clip(pop, lo, hi)
    vals = _evaluate(objective, pop, vectorized)
    initial_best = float(vals.min())
    evals = n
    gen = 0
    while gen < cfg.max_generations and np.ptp(vals) >= cfg.tol:
        gen += 1
        abc = _distinct_triples(rng, n)
        mutant = pop[abc[:, 0]] + cfg.mutation * (pop[abc[:, 1]] - pop[abc[:, 2]])
        cross = rng.random((n, dim)) < cfg.crossover
        cross[np.arange(n), rng.integers(0, dim, size=n)] = True
        trial = np.clip(np.where(cross, mutant, pop), lo, hi)
        trial_vals = _evaluate(objective, trial, vectorized)
        evals += n
        better = trial_vals <= vals
        pop[better] = trial[better]
        vals[better] = trial_vals[better]
    best = int(np.argmin(vals))
    return DEResult(pop[best].copy(), float(vals[best]), gen, evals, initial_best)
