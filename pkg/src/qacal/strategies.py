"""Correction strategies: pick the best measured ``dQ`` (argmax) or optimize a surrogate (predictive)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .de import DEConfig, differential_evolution
from .qubo import CalibrationMatrix, Metrics, QuboProblem, compute_metrics, dq_ranges
from .regression import ModelSelection, select_model
from .sampling import CalibrationDataset, derive_seed

METRICS = ("success_rate", "mean_relative_energy")
DEFAULT_ETAS = (0.01, 0.02, 0.05, 0.1, 0.15)
# an affine surrogate in ~40 dimensions needs more than 300 rand/1 generations to reach its corner
PREDICTIVE_DE = DEConfig(max_generations=3000)
# below this fraction of rows with any ground-state hit, success rates make a poor target
MIN_SUCCESS_FRACTION = 0.05


@dataclass(frozen=True)
class ArgmaxResult:
    matrix: CalibrationMatrix
    row: int
    metrics: Metrics

    def to_json_dict(self) -> dict:
        return {"row": self.row, "dq": self.matrix.to_json_dict(),
                "metrics": self.metrics.to_json_dict()}


def _ranking_keys(ds: CalibrationDataset, metric: str):
    """Sort keys for ``np.lexsort`` (last key is primary); best row sorts first."""
    sr, mre = ds.success_rate, ds.mean_relative_energy
    rows = np.arange(len(ds))
    if metric == "success_rate":
        if np.all(np.isnan(sr[~ds.failed])):
            raise ValueError("success rates are unavailable (ground energy unknown)")
        return rows, mre, -sr
    return rows, -np.nan_to_num(sr, nan=-np.inf), mre


def argmax_strategy(ds: CalibrationDataset, metric: str = "success_rate") -> ArgmaxResult:
    """Row with the highest success rate (or the lowest mean relative energy).

    Ties are broken by the other metric, then by the lowest row index.
    Failed rows never win.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    usable = np.flatnonzero(~ds.failed)
    if usable.size == 0:
        raise ValueError("dataset has no usable rows")
    keys = _ranking_keys(ds, metric)
    order = np.lexsort(tuple(k[usable] for k in keys))
    best = int(usable[order[0]])
    return ArgmaxResult(CalibrationMatrix(ds.dq[best].copy(), ds.eta), best, ds.metrics(best))


# -- repeated evaluation -------------------------------------------------------------

@dataclass(frozen=True)
class RepeatedMetrics:
    """Metrics of ``repeats`` independent samplings of one correction."""

    runs: tuple

    @property
    def success_rates(self) -> np.ndarray:
        return np.array([m.success_rate for m in self.runs], dtype=float)

    @property
    def mean_relative_energies(self) -> np.ndarray:
        return np.array([m.mean_relative_energy for m in self.runs], dtype=float)

    @property
    def mean_sr(self) -> float:
        return float(np.mean(self.success_rates))

    @property
    def std_sr(self) -> float:
        return float(np.std(self.success_rates))

    @property
    def mean_mre(self) -> float:
        return float(np.mean(self.mean_relative_energies))

    @property
    def std_mre(self) -> float:
        return float(np.std(self.mean_relative_energies))

    def mean(self, metric: str) -> float:
        return self.mean_sr if metric == "success_rate" else self.mean_mre

    def summary(self) -> Metrics:
        cbf = float(np.mean([m.chain_break_fraction for m in self.runs]))
        reads = int(sum(m.num_reads for m in self.runs))
        return Metrics(self.mean_sr, self.mean_mre, cbf, reads)

    def to_json_dict(self) -> dict:
        return {"mean_sr": self.mean_sr, "std_sr": self.std_sr,
                "mean_mre": self.mean_mre, "std_mre": self.std_mre,
                "repeats": len(self.runs)}


def repeat_seeds(seed: int, repeats: int) -> list:
    """Seeds shared by every correction evaluated in one comparison (common random numbers)."""
    return [derive_seed(seed, 0x5EED, r) for r in range(repeats)]


def evaluate_repeated(q0: QuboProblem, dq, backend, embedding, repeats: int, reads: int,
                      seed: int) -> RepeatedMetrics:
    """Sample ``q0 + dq`` ``repeats`` times and score each sampling on ``q0``."""
    dq = getattr(dq, "values", dq)
    q = q0 if dq is None else q0.with_flat(q0.flat() + np.asarray(dq, dtype=float))
    runs = []
    for s in repeat_seeds(seed, repeats):
        runs.append(compute_metrics(backend.sample(q, embedding, reads, s, reference=q0), q0))
    return RepeatedMetrics(tuple(runs))


# -- predictive strategy --------------------------------------------------------------

def surrogate_target(ds: CalibrationDataset, metric: str = "success_rate") -> str:
    """Column the surrogate model is trained on.

    The optimized metric itself when it is informative; mean relative energy
    when success rates are missing, constant, or almost always zero.
    """
    if metric == "mean_relative_energy":
        return metric
    sr = ds.valid().success_rate
    if (sr.size and np.all(np.isfinite(sr)) and np.ptp(sr) > 0
            and np.mean(sr > 0) >= MIN_SUCCESS_FRACTION):
        return "success_rate"
    return "mean_relative_energy"


@dataclass(frozen=True)
class EtaCandidate:
    eta: float
    matrix: CalibrationMatrix
    predicted: float
    measured: RepeatedMetrics
    target: str = "mean_relative_energy"

    def to_json_dict(self) -> dict:
        out = {"eta": self.eta, "target": self.target, "predicted": self.predicted}
        out.update(self.measured.to_json_dict())
        out["dq"] = [float(v) for v in self.matrix.values]
        return out


@dataclass(frozen=True)
class PredictiveResult:
    selection: ModelSelection
    baseline: RepeatedMetrics
    per_eta: tuple
    best: EtaCandidate
    metric: str

    def to_json_dict(self) -> dict:
        return {
            "model": self.selection.to_json_dict(),
            "metric": self.metric,
            "per_eta": [c.to_json_dict() for c in self.per_eta],
            "best": {"eta": self.best.eta, "dq": self.best.matrix.to_json_dict(),
                     "metrics": self.best.measured.summary().to_json_dict(),
                     "repeats": self.best.measured.to_json_dict()},
        }


def predictive_strategy(ds: CalibrationDataset, q0: QuboProblem, backend, embedding,
                        eta_list: Sequence[float] = DEFAULT_ETAS, repeats: int = 10,
                        reads: int = 500, seed: int = 0, de_config: Optional[DEConfig] = None,
                        k: int = 5, metric: str = "success_rate",
                        baseline: Optional[RepeatedMetrics] = None,
                        target: Optional[str] = None) -> PredictiveResult:
    """Surrogate-model correction.

    Selects a linear model of ``target`` (see :func:`surrogate_target` for
    the default) by pooled k-fold CV, optimizes its prediction over the
    correction box of every ``eta`` with differential evolution (maximizing
    a success rate, minimizing an energy), then measures each candidate
    ``repeats`` times with ``reads`` reads.  The candidate with the best mean
    measured ``metric`` is returned.  All candidates and the baseline share
    the same sampling seeds, so a zero correction reproduces the baseline
    exactly.
    """
    if not len(eta_list):
        raise ValueError("eta_list must not be empty")
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    if len(ds.valid()) == 0:
        raise ValueError("dataset has no usable rows")
    target = surrogate_target(ds, metric) if target is None else target
    if target not in METRICS:
        raise ValueError(f"target must be one of {METRICS}")
    selection = select_model(ds, k=k, seed=derive_seed(seed, 1), target=target)
    model = selection.model
    sign = -1.0 if target == "success_rate" else 1.0
    objective = lambda x: sign * model.predict(x)
    if baseline is None:
        baseline = evaluate_repeated(q0, None, backend, embedding, repeats, reads, seed)
    base_cfg = de_config or PREDICTIVE_DE
    candidates = []
    for i, eta in enumerate(eta_list):
        box = dq_ranges(q0, float(eta))
        cfg = DEConfig(base_cfg.popsize, base_cfg.mutation, base_cfg.crossover,
                       base_cfg.max_generations, base_cfg.tol, derive_seed(seed, 2, i))
        found = differential_evolution(objective, box, cfg, vectorized=True)
        measured = evaluate_repeated(q0, found.x, backend, embedding, repeats, reads, seed)
        candidates.append(EtaCandidate(float(eta), CalibrationMatrix(found.x, float(eta)),
                                       sign * found.fun, measured, target))
    if metric == "success_rate":
        best = max(candidates, key=lambda c: (c.measured.mean_sr, -c.measured.mean_mre))
    else:
        best = min(candidates, key=lambda c: (c.measured.mean_mre, -c.measured.mean_sr))
    return PredictiveResult(selection, baseline, tuple(candidates), best, metric)


def strategy_report(baseline: RepeatedMetrics, argmax: Optional[ArgmaxResult] = None,
                    argmax_verified: Optional[RepeatedMetrics] = None,
                    predictive: Optional[PredictiveResult] = None) -> dict:
    """JSON report with both strategies side by side."""
    report = {"baseline": baseline.summary().to_json_dict() | {"repeats": baseline.to_json_dict()}}
    if argmax is not None:
        entry = {"row": argmax.row, "dq": argmax.matrix.to_json_dict(),
                 "metrics": argmax.metrics.to_json_dict()}
        if argmax_verified is not None:
            entry["verified"] = argmax_verified.summary().to_json_dict()
            entry["verified_repeats"] = argmax_verified.to_json_dict()
        report["argmax"] = entry
    if predictive is not None:
        pj = predictive.to_json_dict()
        report["predictive"] = {
            "model": {"reg": pj["model"]["reg"], "alpha": pj["model"]["alpha"],
                      "cv_r2": pj["model"]["cv_r2"], "candidates": pj["model"]["candidates"]},
            "per_eta": [{"eta": c["eta"], "mean_sr": c["mean_sr"], "std_sr": c["std_sr"],
                         "mean_mre": c["mean_mre"], "std_mre": c["std_mre"],
                         "target": c["target"], "predicted": c["predicted"]}
                        for c in pj["per_eta"]],
            "best": pj["best"],
        }
    return report
