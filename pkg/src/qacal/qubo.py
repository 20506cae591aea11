"""QUBO problems, energies, normalization, correction ranges and annealing metrics.

Matrices are stored upper-triangular: biases on the diagonal, couplers above
it.  Every flat vector in the package (corrections, bounds, regression
features) uses the same row-major walk over the upper triangle, i.e. the
order produced by ``np.triu_indices(dim)``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

#: Energy-equality tolerance (normalized units) used to count ground-state reads.
ENERGY_TOL = 1e-9

#: Largest dimension accepted by :func:`brute_force_ground_state`.
MAX_BRUTE_FORCE_DIM = 24

GENERATORS = ("uniform", "frustrated")


def num_free(dim: int) -> int:
    """Number of free upper-triangular elements of a ``dim`` x ``dim`` QUBO."""
    return dim * (dim + 1) // 2


def triu_index(dim: int):
    """Row/column index arrays of the canonical element order."""
    return np.triu_indices(dim)


@dataclass(frozen=True, eq=False)
class QuboProblem:
    """An upper-triangular QUBO matrix.

    ``q_max`` is the factor the entries were divided by during normalization
    (1.0 for a problem that was never rescaled).  ``labels`` optionally names
    the variables, which is how physical (embedded) problems remember which
    hardware qubits they live on.
    """

    entries: np.ndarray
    q_max: float = 1.0
    ground_energy: Optional[float] = None
    labels: Optional[tuple] = None

    def __post_init__(self):
        q = np.array(self.entries, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"QUBO matrix must be square, got shape {q.shape}")
        if np.any(np.tril(q, -1) != 0):
            raise ValueError("QUBO matrix must be upper-triangular")
        if not np.all(np.isfinite(q)):
            raise ValueError("QUBO matrix contains non-finite values")
        if self.labels is not None and len(self.labels) != q.shape[0]:
            raise ValueError("labels must name every variable")
        q.setflags(write=False)
        object.__setattr__(self, "entries", q)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def num_free(self) -> int:
        return num_free(self.dim)

    def flat(self) -> np.ndarray:
        """Entries in canonical order (length ``dim*(dim+1)/2``)."""
        return self.entries[triu_index(self.dim)]

    @classmethod
    def from_flat(cls, values, dim: Optional[int] = None, **kwargs) -> "QuboProblem":
        values = np.asarray(values, dtype=float)
        if dim is None:
            dim = int(round((math.sqrt(8 * values.size + 1) - 1) / 2))
        if values.shape != (num_free(dim),):
            raise ValueError(
                f"expected {num_free(dim)} values for dim={dim}, got {values.shape}")
        q = np.zeros((dim, dim))
        q[triu_index(dim)] = values
        return cls(q, **kwargs)

    def with_flat(self, values) -> "QuboProblem":
        """Same problem metadata, new entries.  The ground energy is dropped."""
        return QuboProblem.from_flat(values, self.dim, q_max=self.q_max,
                                     labels=self.labels)

    def with_ground_energy(self, energy: Optional[float]) -> "QuboProblem":
        return replace(self, ground_energy=None if energy is None else float(energy))

    def __add__(self, dq) -> "QuboProblem":
        dq = getattr(dq, "values", dq)
        return self.with_flat(self.flat() + np.asarray(dq, dtype=float))

    def __eq__(self, other):
        if not isinstance(other, QuboProblem):
            return NotImplemented
        return (np.array_equal(self.entries, other.entries)
                and self.q_max == other.q_max
                and self.ground_energy == other.ground_energy
                and self.labels == other.labels)

    @property
    def is_normalized(self) -> bool:
        return bool(abs(np.max(np.abs(self.entries)) - 1.0) <= 1e-12)

    def problem_id(self) -> str:
        """Short content hash of the entries."""
        return hashlib.sha256(np.ascontiguousarray(self.entries).tobytes()).hexdigest()[:16]

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        rows, cols = np.nonzero(self.entries)
        doc = {
            "dim": self.dim,
            "entries": [[int(i), int(j), float(self.entries[i, j])]
                        for i, j in zip(rows, cols)],
            "q_max": float(self.q_max),
        }
        if self.ground_energy is not None:
            doc["ground_energy"] = float(self.ground_energy)
        if self.labels is not None:
            doc["labels"] = [int(v) for v in self.labels]
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "QuboProblem":
        try:
            dim = int(doc["dim"])
            q = np.zeros((dim, dim))
            for i, j, v in doc["entries"]:
                q[int(i), int(j)] = float(v)
            return cls(q, q_max=float(doc.get("q_max", 1.0)),
                       ground_energy=doc.get("ground_energy"),
                       labels=tuple(doc["labels"]) if "labels" in doc else None)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ValueError(f"malformed problem document: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "QuboProblem":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class RangeBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be 1-d and of equal length")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def __len__(self):
        return self.lower.size

    def contains(self, values) -> bool:
        v = np.asarray(values, dtype=float)
        return bool(np.all(v >= self.lower) and np.all(v <= self.upper))

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


@dataclass(frozen=True)
class CalibrationMatrix:
    """A correction ``dQ`` in canonical flat order, with the range fraction behind it."""

    values: np.ndarray
    eta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self):
        return self.values.size

    def to_json_dict(self) -> dict:
        return {"eta": self.eta, "values": [float(v) for v in self.values]}


@dataclass(frozen=True)
class Metrics:
    """Summary of one sample set, scored against the uncorrected problem."""

    success_rate: Optional[float]
    mean_relative_energy: float
    chain_break_fraction: float
    num_reads: int

    def to_json_dict(self) -> dict:
        return {
            "success_rate": self.success_rate,
            "mean_relative_energy": self.mean_relative_energy,
            "chain_break_fraction": self.chain_break_fraction,
            "num_reads": self.num_reads,
        }


# -- energies -----------------------------------------------------------------

def _as_state(state, dim: int) -> np.ndarray:
    x = np.asarray(state)
    if x.shape != (dim,):
        raise ValueError(f"state has shape {x.shape}, problem has dim {dim}")
    if np.any((x != 0) & (x != 1)):
        raise ValueError("state must be binary")
    return x.astype(bool)


def energy(state, q: QuboProblem) -> float:
    """QUBO energy ``sum_{i<=j} Q_ij x_i x_j`` of one binary state.

    The sum is correctly rounded (``math.fsum``), so the result does not
    depend on summation order.
    """
    x = _as_state(state, q.dim)
    idx = np.flatnonzero(x)
    return math.fsum(q.entries[np.ix_(idx, idx)].ravel())


def energies(states, q: QuboProblem) -> np.ndarray:
    """Vectorized energies of a ``(n, dim)`` array of binary states."""
    x = np.asarray(states, dtype=float)
    if x.ndim != 2 or x.shape[1] != q.dim:
        raise ValueError(f"states have shape {x.shape}, problem has dim {q.dim}")
    return np.einsum("ri,ij,rj->r", x, q.entries, x)


def relative_energy(state, q: QuboProblem) -> float:
    if q.ground_energy is None:
        raise ValueError("ground energy of the problem is unknown")
    return energy(state, q) - q.ground_energy


def normalize(q: QuboProblem) -> QuboProblem:
    """Divide by the largest absolute element so that ``max |Q_ij| == 1``."""
    q_max = float(np.max(np.abs(q.entries)))
    if q_max == 0.0:
        raise ValueError("cannot normalize an all-zero QUBO matrix")
    ground = None if q.ground_energy is None else q.ground_energy / q_max
    return QuboProblem(q.entries / q_max, q_max=q_max, ground_energy=ground,
                       labels=q.labels)


def dq_ranges(q: QuboProblem, eta: float) -> RangeBounds:
    """Per-element correction bounds ``[eta(-1 - Q_ij), eta(1 - Q_ij)]``.

    At ``eta == 1`` every in-bounds correction keeps ``Q + dQ`` inside
    ``[-1, 1]``; bounds are nudged by one ulp where floating-point addition
    would otherwise step outside.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if not q.is_normalized:
        raise ValueError("dq_ranges requires a normalized problem (max |Q_ij| == 1)")
    base = q.flat()
    lower = eta * (-1.0 - base)
    upper = eta * (1.0 - base)
    # keep fl(Q + bound) inside [-1, 1]; rounding is monotone so this covers the box
    while np.any(bad := base + upper > 1.0):
        upper[bad] = np.nextafter(upper[bad], -np.inf)
    while np.any(bad := base + lower < -1.0):
        lower[bad] = np.nextafter(lower[bad], np.inf)
    return RangeBounds(lower, upper)


def compute_metrics(samples, q: QuboProblem, tol: float = ENERGY_TOL) -> Metrics:
    """Success rate, mean relative energy and chain-break fraction of a sample set.

    ``samples`` is a :class:`~qacal.annealer.SampleSet` (anything with
    ``reads`` and ``chain_break_fraction``).  Energies are recomputed from the
    reads against ``q``, which should be the uncorrected problem.  Without a
    known ground energy the success rate is ``None`` and the mean absolute
    energy is reported instead.
    """
    reads = np.asarray(samples.reads)
    if reads.ndim != 2 or reads.shape[0] == 0:
        raise ValueError("cannot compute metrics of an empty sample set")
    e = energies(reads, q)
    if q.ground_energy is None:
        return Metrics(None, float(np.mean(e)), float(samples.chain_break_fraction),
                       reads.shape[0])
    rel = e - q.ground_energy
    success = float(np.count_nonzero(rel < tol)) / reads.shape[0]
    return Metrics(success, float(np.mean(np.maximum(rel, 0.0))),
                   float(samples.chain_break_fraction), reads.shape[0])


# -- brute force ----------------------------------------------------------------

def enumerate_states(dim: int, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """States ``start..stop-1`` in lexicographic order (first variable most significant)."""
    stop = 2 ** dim if stop is None else stop
    codes = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(dim - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(np.uint8)


def brute_force_ground_state(q: QuboProblem, chunk: int = 1 << 16):
    """Exhaustive minimum over all ``2**dim`` states.

    Returns ``(state, energy)``; among degenerate minimizers the
    lexicographically smallest state wins.
    """
    d = q.dim
    if d > MAX_BRUTE_FORCE_DIM:
        raise ValueError(f"dim {d} too large for brute force (max {MAX_BRUTE_FORCE_DIM})")
    best_val = np.inf
    candidates = []
    for start in range(0, 2 ** d, chunk):
        states = enumerate_states(d, start, min(start + chunk, 2 ** d))
        e = energies(states, q)
        m = float(e.min())
        if m < best_val - ENERGY_TOL:
            candidates = []
        if m <= best_val + ENERGY_TOL:
            best_val = min(best_val, m)
            candidates.extend(states[e <= best_val + ENERGY_TOL])
    # vectorized sums are not order-exact; settle the winner on exact energies
    exact = [(energy(s, q), i) for i, s in enumerate(candidates)]
    e_min = min(v for v, _ in exact)
    winner = min(i for v, i in exact if v == e_min)
    return np.array(candidates[winner], dtype=np.uint8), e_min


def with_ground_energy(q: QuboProblem) -> QuboProblem:
    """Attach the brute-force ground energy to ``q``."""
    return q.with_ground_energy(brute_force_ground_state(q)[1])


def generate_clique_problem(dim: int, kind: str = "uniform", seed: int = 0) -> QuboProblem:
    """Fully connected, normalized QUBO for benchmarking.

    ``uniform``: every element uniform in [-1, 1].
    ``frustrated``: near-uniform positive (antiferromagnetic) couplers with
    negative biases, which makes many assignments compete for the ground state.
    """
    if dim < 2:
        raise ValueError("a clique problem needs dim >= 2")
    rng = np.random.default_rng(seed)
    p = num_free(dim)
    if kind == "uniform":
        values = rng.uniform(-1.0, 1.0, size=p)
    elif kind == "frustrated":
        rows, cols = triu_index(dim)
        jitter = rng.uniform(-0.1, 0.1, size=p)
        values = np.where(rows == cols, -(dim - 1) / 2.0, 1.0) * (1.0 + jitter)
    else:
        raise ValueError(f"unknown generator {kind!r}; choose from {GENERATORS}")
    return normalize(QuboProblem.from_flat(values, dim))
