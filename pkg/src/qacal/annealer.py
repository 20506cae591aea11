"""Annealing backends: a simulated noisy annealer and the shared sample-set contract.

The simulator models the submitted Hamiltonian as

    Q_submitted = Q0 + dQ + systematic + noise

where ``systematic`` is a frozen per-element offset and ``noise`` is fresh
zero-mean Gaussian noise for every read.  The offsets live either on the
logical elements (exact, convenient for recovery experiments) or on the
physical qubits and couplers of the Chimera graph (so that moving an
embedding changes which offsets it sees).

Random streams
--------------
Read ``r`` of a call with seed ``s`` owns ``np.random.default_rng([s, r])``
and consumes it in a fixed order: noise normals, the initial state, the
Metropolis acceptance draws, and the chain-tie coins.  Reads are therefore
independent of each other and of evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import metropolis_anneal
from .chimera import ChimeraGraph, EmbeddedLayout, Embedding, EmbeddingError, unembed
from .qubo import QuboProblem, energies, num_free, triu_index

LEVELS = ("logical", "physical")
SCHEDULE_KINDS = ("geometric", "linear")

# acceptance draws buffered per chunk of reads (floats)
_CHUNK_FLOATS = 1 << 22


def read_stream(seed: int, read_index: int) -> np.random.Generator:
    """Random stream owned by one read of a sampling call."""
    return np.random.default_rng([int(seed), int(read_index)])


@dataclass(frozen=True)
class AnnealSchedule:
    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0
    kind: str = "geometric"

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("schedule needs at least one sweep")
        if not 0 < self.beta_start <= self.beta_end:
            raise ValueError("need 0 < beta_start <= beta_end")
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    def betas(self) -> np.ndarray:
        if self.kind == "geometric":
            return np.geomspace(self.beta_start, self.beta_end, self.sweeps)
        return np.linspace(self.beta_start, self.beta_end, self.sweeps)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Frozen systematic offsets plus per-read Gaussian noise of width ``sigma``.

    Build with :meth:`logical` or :meth:`physical`; the offsets are drawn once,
    uniform in ``[-scale, scale]``, from ``seed``.  An explicit ``systematic``
    array may be passed instead (logical: length ``dim*(dim+1)/2``; physical:
    an upper-triangular ``(num_qubits, num_qubits)`` matrix).
    """

    systematic: np.ndarray
    sigma: float = 0.01
    level: str = "logical"
    seed: int = 0
    scale: Optional[float] = None

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.level not in LEVELS:
            raise ValueError(f"noise level must be one of {LEVELS}")
        s = np.array(self.systematic, dtype=float)
        if self.level == "logical" and s.ndim != 1:
            raise ValueError("logical systematic offsets must be a flat vector")
        if self.level == "physical" and (s.ndim != 2 or s.shape[0] != s.shape[1]):
            raise ValueError("physical systematic offsets must be a square matrix")
        s.setflags(write=False)
        object.__setattr__(self, "systematic", s)

    @classmethod
    def logical(cls, dim: int, scale: float = 0.02, sigma: float = 0.01, seed: int = 0):
        rng = np.random.default_rng(seed)
        return cls(rng.uniform(-scale, scale, size=num_free(dim)), sigma, "logical", seed, scale)

    @classmethod
    def physical(cls, graph: ChimeraGraph, scale: float = 0.02, sigma: float = 0.01,
                 seed: int = 0):
        rng = np.random.default_rng(seed)
        n = graph.num_qubits
        s = np.zeros((n, n))
        s[np.diag_indices(n)] = rng.uniform(-scale, scale, size=n)
        for a, b in sorted(graph.edges):
            s[a, b] = rng.uniform(-scale, scale)
        return cls(s, sigma, "physical", seed, scale)

    @classmethod
    def noiseless(cls, dim: int):
        return cls(np.zeros(num_free(dim)), 0.0, "logical")

    @property
    def dim(self) -> Optional[int]:
        """Logical dimension the offsets were drawn for (logical level only)."""
        if self.level != "logical":
            return None
        return int(round((np.sqrt(8 * self.systematic.size + 1) - 1) / 2))

    def physical_offsets(self, labels, support) -> np.ndarray:
        """Offsets on the ``support`` elements of a problem living on ``labels``."""
        labels = np.asarray(labels)
        if labels.size and labels.max() >= self.systematic.shape[0]:
            raise ValueError("problem uses qubits outside the noise model's graph")
        sub = self.systematic[np.ix_(labels, labels)]
        return sub[_upper_support(support)]

    def to_json_dict(self) -> dict:
        return {"level": self.level, "sigma": self.sigma, "scale": self.scale, "seed": self.seed}


def _upper_support(support) -> tuple:
    return np.nonzero(np.triu(support))


@dataclass(eq=False)
class SampleSet:
    """Logical reads of one sampling call.

    ``energies`` are evaluated against the reference (uncorrected) problem.
    ``chain_break_flags`` is ``None`` when a backend reports only the fraction.
    """

    reads: np.ndarray
    energies: np.ndarray
    chain_break_flags: Optional[np.ndarray] = None
    seed: Optional[int] = None
    reported_chain_break_fraction: Optional[float] = None

    def __post_init__(self):
        self.reads = np.asarray(self.reads, dtype=np.uint8)
        self.energies = np.asarray(self.energies, dtype=float)
        if self.reads.ndim != 2:
            raise ValueError("reads must be a 2-d array")
        if self.energies.shape != (self.reads.shape[0],):
            raise ValueError("one energy per read required")
        if self.chain_break_flags is not None:
            self.chain_break_flags = np.asarray(self.chain_break_flags, dtype=bool)
            if self.chain_break_flags.shape != self.energies.shape:
                raise ValueError("one chain-break flag per read required")

    def __len__(self):
        return self.reads.shape[0]

    @property
    def num_reads(self) -> int:
        return self.reads.shape[0]

    @property
    def chain_break_fraction(self) -> float:
        if self.chain_break_flags is not None:
            return float(np.mean(self.chain_break_flags)) if len(self) else 0.0
        return float(self.reported_chain_break_fraction or 0.0)

    def identical_to(self, other: "SampleSet") -> bool:
        flags_equal = (
            (self.chain_break_flags is None and other.chain_break_flags is None)
            or (self.chain_break_flags is not None and other.chain_break_flags is not None
                and np.array_equal(self.chain_break_flags, other.chain_break_flags)))
        return (np.array_equal(self.reads, other.reads)
                and np.array_equal(self.energies, other.energies) and flags_equal)


def _noise_count(q: QuboProblem, nm: NoiseModel, support=None) -> int:
    if nm.level == "logical":
        return q.num_free
    return int(np.count_nonzero(np.triu(_default_support(q) if support is None else support)))


def _default_support(q: QuboProblem) -> np.ndarray:
    return (q.entries != 0) | np.eye(q.dim, dtype=bool)


def apply_noise(q: QuboProblem, nm: NoiseModel, read_index: int, seed: Optional[int] = None,
                support=None) -> QuboProblem:
    """The problem one read actually sees: ``q + systematic + N(0, sigma)``.

    Logical-level models act on ``q``'s canonical elements; physical-level
    models need ``q.labels`` (hardware qubits) and perturb the biases and
    couplers in ``support`` (by default the diagonal plus nonzero couplers).
    The Gaussian draws are the first values of ``read_stream(seed, read_index)``,
    with ``seed`` defaulting to ``nm.seed``.  ``q`` is not modified.
    """
    stream = read_stream(nm.seed if seed is None else seed, read_index)
    if nm.level == "logical":
        if nm.systematic.size != q.num_free:
            raise ValueError(
                f"noise model has {nm.systematic.size} offsets, problem has {q.num_free} elements")
        draws = stream.standard_normal(q.num_free)
        return q.with_flat(q.flat() + nm.systematic + nm.sigma * draws)
    if q.labels is None:
        raise ValueError("physical-level noise needs a problem labelled with hardware qubits")
    support = _default_support(q) if support is None else np.asarray(support, dtype=bool)
    idx = _upper_support(support)
    draws = stream.standard_normal(idx[0].size)
    out = np.array(q.entries)
    out[idx] += nm.physical_offsets(q.labels, support) + nm.sigma * draws
    return QuboProblem(out, q_max=q.q_max, labels=q.labels)


def simulated_anneal_read(q: QuboProblem, schedule: AnnealSchedule,
                          rng: np.random.Generator) -> np.ndarray:
    """One Metropolis annealing run from a uniformly random start."""
    n = q.dim
    init = (rng.random(n) < 0.5).astype(np.uint8)[None, :]
    uniforms = rng.random((1, schedule.sweeps, n))
    return metropolis_anneal(np.ascontiguousarray(q.entries)[None], init, uniforms,
                             schedule.betas())[0]


class SimulatedAnnealer:
    """Noisy classical stand-in for an annealer on a Chimera graph."""

    def __init__(self, graph: ChimeraGraph, noise: Optional[NoiseModel] = None,
                 schedule: Optional[AnnealSchedule] = None, chain_strength: float = 1.0):
        self.graph = graph
        self.noise = noise
        self.schedule = schedule or AnnealSchedule()
        self.chain_strength = float(chain_strength)
        if noise is not None and noise.level == "physical" \
                and noise.systematic.shape[0] != graph.num_qubits:
            raise ValueError("physical noise model was built for a different graph")
        self._layouts = {}

    def layout(self, embedding: Embedding) -> EmbeddedLayout:
        key = embedding.chains
        if key not in self._layouts:
            self._layouts[key] = EmbeddedLayout(embedding, self.graph, self.chain_strength)
        return self._layouts[key]

    def sample(self, q: QuboProblem, embedding: Embedding, num_reads: int, seed: int,
               reference: Optional[QuboProblem] = None) -> SampleSet:
        """Anneal ``num_reads`` times; energies are evaluated on ``reference`` (default ``q``)."""
        if num_reads < 1:
            raise ValueError("num_reads must be positive")
        if q.dim != embedding.dim:
            raise EmbeddingError(f"problem has {q.dim} variables, embedding has {embedding.dim}")
        if np.max(np.abs(q.entries)) > 1.0 + 1e-12:
            raise ValueError("submitted problem leaves the normalized range [-1, 1]")
        layout = self.layout(embedding)
        nm = self.noise
        n, d = layout.num_physical, q.dim
        base_flat = q.flat()
        support_idx = _upper_support(layout.support)
        n_noise = 0
        if nm is not None:
            if nm.level == "logical":
                if nm.systematic.size != q.num_free:
                    raise ValueError("logical noise model does not match the problem size")
                n_noise = q.num_free
            else:
                n_noise = support_idx[0].size
                phys_offsets = nm.physical_offsets(layout.qubits, layout.support)
        base_phys = layout.physical_matrices(base_flat)
        betas = self.schedule.betas()
        sweeps = betas.size
        chunk = max(1, min(num_reads, _CHUNK_FLOATS // (sweeps * n)))

        logical_reads = np.empty((num_reads, d), dtype=np.uint8)
        flags = np.empty(num_reads, dtype=bool)
        for start in range(0, num_reads, chunk):
            stop = min(num_reads, start + chunk)
            r = stop - start
            noise = np.empty((r, n_noise))
            init = np.empty((r, n), dtype=np.uint8)
            uniforms = np.empty((r, sweeps, n))
            coins = np.empty((r, d), dtype=bool)
            for k in range(r):
                g = read_stream(seed, start + k)
                noise[k] = g.standard_normal(n_noise)
                init[k] = g.random(n) < 0.5
                uniforms[k] = g.random((sweeps, n))
                coins[k] = g.random(d) < 0.5
            if nm is None:
                qs = np.broadcast_to(base_phys, (r, n, n))
            elif nm.level == "logical":
                qs = layout.physical_matrices(base_flat + nm.systematic + nm.sigma * noise)
            else:
                qs = np.repeat(base_phys, r, axis=0)
                qs[:, support_idx[0], support_idx[1]] += phys_offsets + nm.sigma * noise
            phys = metropolis_anneal(np.ascontiguousarray(qs), init, uniforms, betas)
            logical_reads[start:stop], flags[start:stop] = unembed(phys, embedding, coins=coins)
        ref = q if reference is None else reference
        return SampleSet(logical_reads, energies(logical_reads, ref), flags, seed)


def sample(backend, q_submitted: QuboProblem, embedding: Optional[Embedding], num_reads: int,
           seed: int, reference: Optional[QuboProblem] = None) -> SampleSet:
    """Draw ``num_reads`` logical reads of ``q_submitted`` from ``backend``."""
    return backend.sample(q_submitted, embedding, num_reads, seed, reference=reference)
