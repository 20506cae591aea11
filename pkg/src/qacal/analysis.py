"""Post-hoc analyses: performance and learning curves, line walks through dQ space,
and success-rate distributions across embeddings."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._io import write_csv
from .regression import UndefinedVarianceError, cross_validate_xy, dataset_xy
from .sampling import CalibrationDataset, derive_seed
from .strategies import METRICS, evaluate_repeated, repeat_seeds
from .qubo import compute_metrics


@dataclass(frozen=True)
class CurvePoint:
    sample_size: int
    mean: float
    std: float
    repetitions: int


def _metric_column(ds: CalibrationDataset, metric: str) -> np.ndarray:
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    values = getattr(ds.valid(), metric)
    if np.any(np.isnan(values)):
        raise ValueError(f"{metric} is unavailable for some rows")
    return values


def bootstrap_performance_curve(ds: CalibrationDataset, sizes: Sequence[int], reps: int = 1000,
                                seed: int = 0, metric: str = "success_rate",
                                replace: bool = False) -> list:
    """Expected argmax result when only ``N_i`` of the evaluated corrections are available.

    Each repetition draws one random permutation of the dataset and takes its
    first ``N_i`` rows as the subsample for every size, so the subsamples are
    uniform without-replacement draws that are also nested across sizes.
    The argmax metric of a nested subsample can only improve with ``N_i``,
    which makes the mean curve monotone by construction.  ``replace=True``
    draws independent with-replacement subsamples instead.
    """
    values = _metric_column(ds, metric)
    n = values.size
    sizes = [int(s) for s in sizes]
    if any(s < 1 or s > n for s in sizes):
        raise ValueError(f"subsample sizes must lie in [1, {n}]")
    if reps < 1:
        raise ValueError("need at least one repetition")
    rng = np.random.default_rng(seed)
    better = np.maximum if metric == "success_rate" else np.minimum
    results = np.empty((reps, len(sizes)))
    summary = lambda col: (float(col[0]), 0.0) if np.all(col == col[0]) else (
        float(col.mean()), float(col.std()))
    for r in range(reps):
        if replace:
            for c, s in enumerate(sizes):
                results[r, c] = better.reduce(values[rng.integers(0, n, size=s)])
        else:
            running = better.accumulate(values[rng.permutation(n)])
            results[r] = running[np.array(sizes) - 1]
    return [CurvePoint(s, *summary(results[:, c]), reps) for c, s in enumerate(sizes)]


def learning_curve(ds: CalibrationDataset, sizes: Sequence[int], reps: int = 100, seed: int = 0,
                   k: int = 5, reg: str = "none", alpha: float = 0.0,
                   target: str = "mean_relative_energy") -> list:
    """Pooled k-fold CV R^2 of the linear model on random subsamples of size ``N_i``."""
    x, y = dataset_xy(ds, target)
    sizes = [int(s) for s in sizes]
    if min(sizes) <= 2 * k:
        raise ValueError(f"subsamples must exceed {2 * k} rows for {k}-fold CV")
    if max(sizes) > len(y):
        raise ValueError(f"subsample size exceeds the {len(y)} usable rows")
    rng = np.random.default_rng(seed)
    out = []
    for s in sizes:
        scores = []
        for r in range(reps):
            idx = rng.choice(len(y), size=s, replace=False)
            try:
                scores.append(cross_validate_xy(x[idx], y[idx], reg, alpha, k,
                                                seed=derive_seed(seed, s, r)))
            except UndefinedVarianceError:
                continue
        if not scores:
            raise ValueError(f"every subsample of size {s} had constant targets")
        out.append(CurvePoint(s, float(np.mean(scores)), float(np.std(scores)), len(scores)))
    return out


# -- line walks -----------------------------------------------------------------------

@dataclass(frozen=True)
class WalkSeries:
    direction: np.ndarray
    arc: np.ndarray         # t * delta per recorded step
    mean_sr: np.ndarray
    std_sr: np.ndarray
    mean_mre: np.ndarray
    std_mre: np.ndarray


def random_directions(dim: int, count: int, seed: int) -> np.ndarray:
    """Unit vectors uniform on the sphere (normalized Gaussians)."""
    g = np.random.default_rng(seed).standard_normal((count, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def random_walk_probe(q0, backend, embedding, num_walks: int = 14, delta: float = 0.01,
                      max_steps: int = 20, repeats: int = 10, reads: int = 500, seed: int = 0,
                      directions: Optional[np.ndarray] = None) -> list:
    """Measure performance along straight lines ``Q0 + t*delta*u`` from ``Q0``.

    Each walk stops after ``max_steps`` steps or before any element of the
    submitted matrix would leave ``[-1, 1]``.  Every point uses the same
    ``repeats`` sampling seeds.
    """
    if delta <= 0:
        raise ValueError("step size must be positive")
    if directions is None:
        directions = random_directions(q0.num_free, num_walks, derive_seed(seed, 7))
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    norms = np.linalg.norm(directions, axis=1)
    if np.any(norms == 0):
        raise ValueError("a walk direction is zero and cannot be normalized")
    directions = directions / norms[:, None]
    base = q0.flat()
    walks = []
    for u in directions:
        stats = []
        for t in range(max_steps + 1):
            dq = t * delta * u
            if np.any(np.abs(base + dq) > 1.0):
                break
            rm = evaluate_repeated(q0, dq, backend, embedding, repeats, reads, seed)
            stats.append((t * delta, rm.mean_sr, rm.std_sr, rm.mean_mre, rm.std_mre))
        a = np.array(stats).reshape(-1, 5)
        walks.append(WalkSeries(u, *a.T))
    return walks


# -- embedding variation ------------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingHistogram:
    embedding: int
    success_rates: np.ndarray  # (samplings, experiments)
    bin_edges: np.ndarray
    counts: np.ndarray          # (samplings, bins)

    @property
    def means(self) -> np.ndarray:
        return self.success_rates.mean(axis=1)

    @property
    def stds(self) -> np.ndarray:
        return self.success_rates.std(axis=1)

    @property
    def mean(self) -> float:
        return float(self.success_rates.mean())

    @property
    def standard_error(self) -> float:
        sr = self.success_rates.ravel()
        return float(sr.std(ddof=1) / np.sqrt(sr.size)) if sr.size > 1 else 0.0


def embedding_variation_histograms(q0, embeddings, backend, samplings: int = 3,
                                   experiments: int = 100, reads: int = 200, seed: int = 0,
                                   bins: int = 20) -> list:
    """Success-rate distributions of repeated experiments, per embedding and sampling.

    Experiment ``j`` of sampling ``s`` on embedding ``e`` uses seed
    ``derive_seed(seed, e, s, j)``.
    """
    from .chimera import check_embedding

    edges = np.linspace(0.0, 1.0, bins + 1)
    out = []
    for ei, emb in enumerate(embeddings):
        if hasattr(backend, "graph"):
            check_embedding(emb, backend.graph)
        sr = np.empty((samplings, experiments))
        for s in range(samplings):
            for j in range(experiments):
                ss = backend.sample(q0, emb, reads, derive_seed(seed, ei, s, j), reference=q0)
                sr[s, j] = compute_metrics(ss, q0).success_rate
        counts = np.stack([np.histogram(row, bins=edges)[0] for row in sr])
        out.append(EmbeddingHistogram(ei, sr, edges, counts))
    return out


def means_differ(a: EmbeddingHistogram, b: EmbeddingHistogram, n_se: float = 3.0) -> bool:
    """True when the mean success rates differ by more than ``n_se`` standard errors."""
    se = np.hypot(a.standard_error, b.standard_error)
    return bool(abs(a.mean - b.mean) > n_se * se)


# -- plot-ready CSV -----------------------------------------------------------------------

def write_curve_csv(path, points, provenance=None, label="success_rate") -> None:
    write_csv(path, ["sample_size", f"mean_{label}", f"std_{label}", "repetitions"],
              [(p.sample_size, p.mean, p.std, p.repetitions) for p in points], provenance)


def write_walks_csv(path, walks, provenance=None) -> None:
    rows = []
    for w, walk in enumerate(walks):
        for i in range(walk.arc.size):
            rows.append((w, i, float(walk.arc[i]), float(walk.mean_sr[i]), float(walk.std_sr[i]),
                         float(walk.mean_mre[i]), float(walk.std_mre[i])))
    write_csv(path, ["walk", "step", "arc_length", "mean_sr", "std_sr", "mean_mre", "std_mre"],
              rows, provenance)


def write_histograms_csv(path, hists, provenance=None) -> None:
    rows = []
    for h in hists:
        for s in range(h.counts.shape[0]):
            for b in range(h.counts.shape[1]):
                rows.append((h.embedding, s, float(h.bin_edges[b]), float(h.bin_edges[b + 1]),
                             int(h.counts[s, b])))
    write_csv(path, ["embedding", "sampling", "bin_lo", "bin_hi", "count"], rows, provenance)


def write_eta_sweep_csv(path, predictive, provenance=None) -> None:
    rows = [(c.eta, c.measured.mean_sr, c.measured.std_sr, c.measured.mean_mre,
             c.measured.std_mre, c.target, c.predicted) for c in predictive.per_eta]
    write_csv(path, ["eta", "mean_sr", "std_sr", "mean_mre", "std_mre", "target", "predicted"], rows,
              provenance)
