"""Linear surrogate models of annealing performance and their cross-validation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._kernels import lasso_coordinate_descent

REGULARIZERS = ("none", "l1", "l2")

LASSO_TOL = 1e-8
LASSO_MAX_PASSES = 10_000

# regularization strengths tuned per system size (number of free elements)
TUNED_ALPHAS = {
    136: {"l1": 1e-5, "l2": 0.16},
    325: {"l1": 7e-6, "l2": 0.53},
    666: {"l1": 2e-5, "l2": 1.0},
}
ALPHA_GRID = {
    "l1": tuple(np.logspace(-6, -1, 11)),
    "l2": tuple(np.logspace(-3, 3, 13)),
}


class UndefinedVarianceError(ValueError):
    """R^2 is undefined when the observed values are constant."""


@dataclass(frozen=True)
class RegressionModel:
    weights: np.ndarray
    intercept: float
    reg: str = "none"
    alpha: float = 0.0
    feature_order: str = "triu-row-major"

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ self.weights + self.intercept

    def to_json_dict(self) -> dict:
        return {"reg": self.reg, "alpha": self.alpha, "intercept": self.intercept,
                "weights": [float(w) for w in self.weights], "feature_order": self.feature_order}


def _check_xy(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValueError(f"features {x.shape} and targets {y.shape} do not match")
    if x.shape[0] < 2:
        raise ValueError("need at least two samples to fit")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("features and targets must be finite")
    return x, y


def fit_linear(x, y, reg: str = "none", alpha: float = 0.0) -> RegressionModel:
    """Least squares, ridge (``alpha*|w|^2``) or lasso (``alpha*|w|_1``).

    The intercept is never penalized.  Ordinary least squares solves the
    normal equations, falling back to the pseudo-inverse when they are
    singular.  Ridge uses the closed form on centered features.  Lasso runs
    cyclic coordinate descent on standardized features with the objective
    ``1/(2m) |y - Xw|^2 + alpha |w|_1`` and reports weights in original units.
    """
    x, y = _check_xy(x, y)
    if reg not in REGULARIZERS:
        raise ValueError(f"unknown regularization {reg!r}")
    if reg != "none" and alpha < 0:
        raise ValueError("alpha must be non-negative")
    x_mean, y_mean = x.mean(axis=0), y.mean()
    xc, yc = x - x_mean, y - y_mean
    if reg == "none":
        gram = xc.T @ xc
        try:
            if np.linalg.matrix_rank(gram) < gram.shape[0]:
                raise np.linalg.LinAlgError
            w = np.linalg.solve(gram, xc.T @ yc)
        except np.linalg.LinAlgError:
            w = np.linalg.pinv(xc) @ yc
    elif reg == "l2":
        w = np.linalg.solve(xc.T @ xc + alpha * np.eye(x.shape[1]), xc.T @ yc)
    else:
        scale = xc.std(axis=0)
        scale[scale == 0] = 1.0
        xs = xc / scale
        m = x.shape[0]
        w_std, _ = lasso_coordinate_descent(xs.T @ xs / m, xs.T @ yc / m, float(alpha),
                                            LASSO_TOL, LASSO_MAX_PASSES)
        w = w_std / scale
    intercept = float(y_mean - x_mean @ w)
    return RegressionModel(np.asarray(w, dtype=float), intercept, reg, float(alpha))


def r_squared(predicted, actual) -> float:
    """``1 - SS_res / SS_tot`` about the mean of ``actual``."""
    pred = np.asarray(predicted, dtype=float)
    act = np.asarray(actual, dtype=float)
    if pred.shape != act.shape or act.ndim != 1 or act.size == 0:
        raise ValueError("predicted and actual must be equal-length, nonempty vectors")
    ss_tot = np.sum((act - act.mean()) ** 2)
    if ss_tot == 0:
        raise UndefinedVarianceError("actual values are constant; R^2 is undefined")
    return float(1.0 - np.sum((act - pred) ** 2) / ss_tot)


def fold_indices(n: int, k: int, seed) -> list:
    if k < 2:
        raise ValueError("need at least two folds")
    if n < k:
        raise ValueError(f"cannot split {n} rows into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, k)


def cross_val_predict(x, y, reg="none", alpha=0.0, k=5, seed=0, folds=None) -> np.ndarray:
    """Out-of-fold predictions for every row."""
    x, y = _check_xy(x, y)
    folds = fold_indices(len(y), k, seed) if folds is None else folds
    pred = np.empty_like(y)
    for test in folds:
        train = np.setdiff1d(np.arange(len(y)), test, assume_unique=True)
        model = fit_linear(x[train], y[train], reg, alpha)
        pred[test] = model.predict(x[test])
    return pred


def cross_validate_xy(x, y, reg="none", alpha=0.0, k=5, seed=0, folds=None) -> float:
    """Pooled k-fold R^2: all out-of-fold predictions scored together."""
    pred = cross_val_predict(x, y, reg, alpha, k, seed, folds)
    return r_squared(pred, np.asarray(y, dtype=float))


def dataset_xy(ds, target: str = "mean_relative_energy"):
    valid = ds.valid()
    return valid.dq, getattr(valid, target)


def cross_validate(ds, reg="none", alpha=0.0, k=5, seed=0,
                   target="mean_relative_energy") -> float:
    """Pooled k-fold R^2 of a linear model on a calibration dataset."""
    x, y = dataset_xy(ds, target)
    if len(y) < k:
        raise ValueError(f"dataset has {len(y)} usable rows, fewer than {k} folds")
    return cross_validate_xy(x, y, reg, alpha, k, seed)


@dataclass(frozen=True)
class ModelSelection:
    model: RegressionModel
    reg: str
    alpha: float
    cv_r2: float
    scores: dict  # (reg, alpha) -> pooled CV R^2 on shared folds

    def to_json_dict(self) -> dict:
        return {"reg": self.reg, "alpha": self.alpha, "cv_r2": self.cv_r2,
                "candidates": [{"reg": r, "alpha": a, "cv_r2": s}
                               for (r, a), s in self.scores.items()]}


def candidate_alphas(num_params: int) -> dict:
    """Tuned strengths for the three benchmark sizes, a log grid otherwise."""
    if num_params in TUNED_ALPHAS:
        return {reg: (a,) for reg, a in TUNED_ALPHAS[num_params].items()}
    return dict(ALPHA_GRID)


def select_model(ds, k=5, seed=0, alphas: Optional[dict] = None,
                 target="mean_relative_energy") -> ModelSelection:
    """Fit none/L1/L2 linear models, keep the best pooled CV R^2 (shared folds).

    The winner is refit on all usable rows.  Ties go to the simpler model
    (none, then l1, then l2, then smaller alpha).
    """
    x, y = dataset_xy(ds, target)
    folds = fold_indices(len(y), k, seed)
    alphas = candidate_alphas(x.shape[1]) if alphas is None else alphas
    scores = {("none", 0.0): cross_validate_xy(x, y, "none", 0.0, folds=folds)}
    for reg in ("l1", "l2"):
        for a in alphas.get(reg, ()):
            scores[(reg, float(a))] = cross_validate_xy(x, y, reg, float(a), folds=folds)
    (reg, alpha), best = max(scores.items(), key=lambda kv: kv[1])
    return ModelSelection(fit_linear(x, y, reg, alpha), reg, alpha, best, scores)
