"""Compiled inner loops."""
import numba
import numpy as np

# prefer layers that need no extra runtime; tbb is tried last
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def metropolis_anneal(qs, init, uniforms, betas):
    """Single-spin-flip Metropolis sweeps, one independent chain per read.

    qs:       (R, n, n) upper-triangular QUBO matrices, one per read
    init:     (R, n) uint8 starting states
    uniforms: (R, sweeps, n) acceptance draws in [0, 1)
    betas:    (sweeps,) inverse temperature per sweep

    Local fields are updated only along couplers that are nonzero in some
    read; skipped terms are exact zeros, so the result is the same as a dense
    update.
    """
    pattern = np.any(qs != 0, axis=0)
    pattern = pattern | pattern.T
    np.fill_diagonal(pattern, False)
    ptr = np.zeros(pattern.shape[0] + 1, dtype=np.int64)
    ptr[1:] = np.cumsum(pattern.sum(axis=1))
    idx = np.nonzero(pattern)[1].astype(np.int64)
    return _metropolis_sparse(qs, init, uniforms, betas, ptr, idx)


@numba.njit(parallel=True, cache=True)
def _metropolis_sparse(qs, init, uniforms, betas, ptr, idx):
    n_reads, n, _ = qs.shape
    out = init.copy()
    for r in numba.prange(n_reads):
        q = qs[r]
        x = out[r]
        field = np.empty(n)
        for i in range(n):
            s = q[i, i]
            for k in range(ptr[i], ptr[i + 1]):
                j = idx[k]
                if x[j] != 0:
                    s += q[i, j] + q[j, i]
            field[i] = s
        for t in range(betas.shape[0]):
            beta = betas[t]
            for i in range(n):
                delta = field[i] if x[i] == 0 else -field[i]
                if delta <= 0.0 or uniforms[r, t, i] < np.exp(-beta * delta):
                    step = 1.0 if x[i] == 0 else -1.0
                    x[i] = 1 - x[i]
                    for k in range(ptr[i], ptr[i + 1]):
                        j = idx[k]
                        field[j] += step * (q[i, j] + q[j, i])
    return out


@numba.njit(cache=True)
def lasso_coordinate_descent(gram, xty, alpha, tol, max_passes):
    """Cyclic coordinate descent for ``(1/2) w'Gw - w'c + alpha*|w|_1``.

    ``gram`` and ``xty`` are the (scaled) normal-equation terms of standardized
    features.  Stops when the largest weight change in a pass is below ``tol``.
    Returns ``(weights, passes)``.
    """
    p = xty.shape[0]
    w = np.zeros(p)
    grad = xty.copy()  # c - G w, kept current
    for it in range(max_passes):
        biggest = 0.0
        for j in range(p):
            gjj = gram[j, j]
            if gjj <= 0.0:
                continue
            rho = grad[j] + gjj * w[j]
            if rho > alpha:
                new = (rho - alpha) / gjj
            elif rho < -alpha:
                new = (rho + alpha) / gjj
            else:
                new = 0.0
            change = new - w[j]
            if change != 0.0:
                for k in range(p):
                    grad[k] -= gram[k, j] * change
                w[j] = new
                if abs(change) > biggest:
                    biggest = abs(change)
        if biggest < tol:
            return w, it + 1
    return w, max_passes
