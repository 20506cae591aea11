"""Chimera hardware graphs and clique embeddings.

Physical qubit numbering follows the usual linear Chimera convention::

    index = ((row * cols + col) * 2 + shore) * 4 + k

with ``shore == 0`` the vertical half of a unit cell (coupled to the same
``k`` in the cells above and below) and ``shore == 1`` the horizontal half
(coupled left and right).  Inside a cell the two shores form a K4,4.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .qubo import QuboProblem, num_free, triu_index

SHORE = 4
VERTICAL, HORIZONTAL = 0, 1


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class ChimeraGraph:
    rows: int
    cols: int
    shore_size: int = SHORE

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"Chimera dimensions must be positive, got {self.rows}x{self.cols}")
        if self.shore_size != SHORE:
            raise ValueError("only shore size 4 is supported")

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols * 2 * self.shore_size

    def qubit(self, row: int, col: int, shore: int, k: int) -> int:
        return ((row * self.cols + col) * 2 + shore) * self.shore_size + k

    def coordinates(self, q: int):
        """Inverse of :meth:`qubit`: ``(row, col, shore, k)``."""
        if not 0 <= q < self.num_qubits:
            raise IndexError(f"qubit {q} outside a {self.rows}x{self.cols} Chimera graph")
        k = q % self.shore_size
        shore = (q // self.shore_size) % 2
        cell = q // (2 * self.shore_size)
        return cell // self.cols, cell % self.cols, shore, k

    @cached_property
    def edges(self) -> frozenset:
        """Couplers as ``(a, b)`` pairs with ``a < b``."""
        out = set()
        t = self.shore_size
        for r in range(self.rows):
            for c in range(self.cols):
                for k in range(t):
                    for k2 in range(t):
                        a, b = self.qubit(r, c, VERTICAL, k), self.qubit(r, c, HORIZONTAL, k2)
                        out.add((min(a, b), max(a, b)))
                    if r + 1 < self.rows:
                        out.add((self.qubit(r, c, VERTICAL, k), self.qubit(r + 1, c, VERTICAL, k)))
                    if c + 1 < self.cols:
                        out.add((self.qubit(r, c, HORIZONTAL, k), self.qubit(r, c + 1, HORIZONTAL, k)))
        return frozenset(out)

    @cached_property
    def adjacency(self) -> dict:
        adj = {q: set() for q in range(self.num_qubits)}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def degree(self, q: int) -> int:
        return len(self.adjacency[q])


def build_chimera(rows: int, cols: Optional[int] = None) -> ChimeraGraph:
    return ChimeraGraph(rows, rows if cols is None else cols)


@dataclass(frozen=True)
class Embedding:
    """One chain of physical qubits per logical variable."""

    chains: tuple
    chimera: Optional[tuple] = None  # (rows, cols) of the graph it was built for

    def __post_init__(self):
        object.__setattr__(self, "chains", tuple(tuple(int(q) for q in c) for c in self.chains))
        if self.chimera is not None:
            object.__setattr__(self, "chimera", tuple(int(v) for v in self.chimera))

    @property
    def dim(self) -> int:
        return len(self.chains)

    @cached_property
    def qubits(self) -> tuple:
        """Sorted physical qubits in use; physical reads are indexed in this order."""
        return tuple(sorted(q for c in self.chains for q in c))

    @property
    def chain_lengths(self) -> list:
        return [len(c) for c in self.chains]

    def to_json_dict(self) -> dict:
        doc = {"chains": [list(c) for c in self.chains]}
        if self.chimera is not None:
            doc["chimera"] = {"rows": self.chimera[0], "cols": self.chimera[1]}
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Embedding":
        try:
            chim = doc.get("chimera")
            return cls(tuple(doc["chains"]),
                       None if chim is None else (chim["rows"], chim["cols"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed embedding document: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "Embedding":
        return cls.from_json_dict(json.loads(text))


def _chain_connected(chain, g: ChimeraGraph) -> bool:
    members = set(chain)
    seen = {chain[0]}
    stack = [chain[0]]
    while stack:
        q = stack.pop()
        for n in g.adjacency[q]:
            if n in members and n not in seen:
                seen.add(n)
                stack.append(n)
    return seen == members


def inter_chain_edges(e: Embedding, g: ChimeraGraph, i: int, j: int) -> list:
    """Hardware couplers joining chain ``i`` to chain ``j``, sorted."""
    cj = set(e.chains[j])
    found = []
    for a in e.chains[i]:
        for b in g.adjacency[a]:
            if b in cj:
                found.append((min(a, b), max(a, b)))
    return sorted(found)


def embedding_problems(e: Embedding, g: ChimeraGraph, couplers=None) -> list:
    """Violated embedding invariants, as messages (empty when valid).

    ``couplers`` is the set of logical pairs that must be realized; the
    complete graph by default.
    """
    problems = []
    used = [q for c in e.chains for q in c]
    if any(not 0 <= q < g.num_qubits for q in used):
        return ["embedding uses qubits outside the graph"]
    if len(used) != len(set(used)):
        problems.append("chains overlap")
    for i, c in enumerate(e.chains):
        if not c:
            problems.append(f"chain {i} is empty")
        elif not _chain_connected(c, g):
            problems.append(f"chain {i} is not connected")
    if couplers is None:
        couplers = [(i, j) for i in range(e.dim) for j in range(i + 1, e.dim)]
    for i, j in couplers:
        if not inter_chain_edges(e, g, i, j):
            problems.append(f"no coupler between chains {i} and {j}")
    return problems


def check_embedding(e: Embedding, g: ChimeraGraph, couplers=None) -> None:
    problems = embedding_problems(e, g, couplers)
    if problems:
        raise EmbeddingError("; ".join(problems))


def embed_clique(dim: int, g: ChimeraGraph) -> Embedding:
    """Native clique embedding of K_dim in the top-left ``t x t`` block, ``t = ceil(dim/4)``.

    Variable ``4b + k`` takes horizontal qubit ``k`` of cells ``(b, 0..b)`` and
    vertical qubit ``k`` of cells ``(b..t-1, b)``; every chain has ``t + 1``
    qubits and meets every other chain in some lower-triangle cell.
    """
    t = math.ceil(dim / g.shore_size)
    if dim < 1:
        raise ValueError("dim must be positive")
    if t > min(g.rows, g.cols):
        raise EmbeddingError(
            f"K_{dim} needs a {t}x{t} Chimera block, graph is {g.rows}x{g.cols}")
    chains = []
    for v in range(dim):
        b, k = divmod(v, g.shore_size)
        chain = [g.qubit(b, c, HORIZONTAL, k) for c in range(b + 1)]
        chain += [g.qubit(r, b, VERTICAL, k) for r in range(b, t)]
        chains.append(chain)
    return Embedding(tuple(chains), (g.rows, g.cols))


def translate_embedding(e: Embedding, g: ChimeraGraph, cell_offset) -> Embedding:
    """Shift every chain by ``(drow, dcol)`` unit cells."""
    dr, dc = (int(v) for v in cell_offset)
    chains = []
    for chain in e.chains:
        moved = []
        for q in chain:
            r, c, shore, k = g.coordinates(q)
            r2, c2 = r + dr, c + dc
            if not (0 <= r2 < g.rows and 0 <= c2 < g.cols):
                raise EmbeddingError(
                    f"offset {(dr, dc)} moves qubit {q} out of the {g.rows}x{g.cols} graph")
            moved.append(g.qubit(r2, c2, shore, k))
        chains.append(moved)
    return Embedding(tuple(chains), (g.rows, g.cols))


class EmbeddedLayout:
    """Linear map from logical QUBO elements to a physical QUBO on ``e.qubits``.

    A logical bias is split equally over its chain, a logical coupler lands on
    the lowest-index coupler joining the two chains, and every intra-chain
    coupler ``(a, b)`` receives the agreement penalty ``cs*(x_a + x_b - 2 x_a x_b)``.
    Precomputing the map lets a batch of per-read logical matrices be embedded
    with one matrix product.
    """

    def __init__(self, e: Embedding, g: ChimeraGraph, chain_strength: float = 1.0):
        if chain_strength <= 0:
            raise ValueError("chain strength must be positive")
        bad = embedding_problems(e, g, couplers=[])
        if bad:
            raise EmbeddingError("; ".join(bad))
        self.embedding = e
        self.graph = g
        self.chain_strength = float(chain_strength)
        self.qubits = e.qubits
        pos = {q: i for i, q in enumerate(self.qubits)}
        n, d = len(self.qubits), e.dim
        rows, cols = triu_index(d)
        # map[p] is the physical (flattened n*n) contribution of logical element p
        self.map = np.zeros((num_free(d), n * n))
        self.missing = []
        for p, (i, j) in enumerate(zip(rows, cols)):
            if i == j:
                share = 1.0 / len(e.chains[i])
                for q in e.chains[i]:
                    self.map[p, pos[q] * n + pos[q]] += share
            else:
                found = inter_chain_edges(e, g, i, j)
                if not found:
                    self.missing.append(p)
                    continue
                a, b = sorted((pos[found[0][0]], pos[found[0][1]]))
                self.map[p, a * n + b] = 1.0
        self.penalty = np.zeros((n, n))
        self.chain_edges = []
        for chain in e.chains:
            members = sorted(chain)
            for x, a in enumerate(members):
                for b in members[x + 1:]:
                    if g.has_edge(a, b):
                        pa, pb = pos[a], pos[b]
                        self.chain_edges.append((pa, pb))
                        self.penalty[pa, pa] += chain_strength
                        self.penalty[pb, pb] += chain_strength
                        self.penalty[pa, pb] -= 2.0 * chain_strength
        self.chain_index = [np.array([pos[q] for q in c]) for c in e.chains]
        flat = self.map.sum(axis=0).reshape(n, n) != 0
        #: physical elements that carry logical terms or chain couplers
        self.support = flat | (self.penalty != 0) | np.eye(n, dtype=bool)

    @property
    def num_physical(self) -> int:
        return len(self.qubits)

    def physical_matrices(self, logical_flat: np.ndarray) -> np.ndarray:
        """``(R, P)`` logical vectors to ``(R, n, n)`` physical matrices."""
        logical_flat = np.atleast_2d(logical_flat)
        if self.missing:
            lost = logical_flat[:, self.missing]
            if np.any(lost != 0):
                raise EmbeddingError("embedding lacks a coupler for a nonzero logical coupler")
        n = self.num_physical
        return (logical_flat @ self.map).reshape(-1, n, n) + self.penalty


def embed_qubo(q: QuboProblem, e: Embedding, chain_strength: float = 1.0,
               graph: Optional[ChimeraGraph] = None) -> QuboProblem:
    """Physical QUBO on ``e.qubits`` realizing ``q`` with chain penalties."""
    if q.dim != e.dim:
        raise EmbeddingError(f"problem has {q.dim} variables, embedding has {e.dim} chains")
    g = graph if graph is not None else _graph_for(e)
    layout = EmbeddedLayout(e, g, chain_strength)
    phys = layout.physical_matrices(q.flat())[0]
    return QuboProblem(phys, labels=layout.qubits)


def _graph_for(e: Embedding) -> ChimeraGraph:
    if e.chimera is None:
        raise EmbeddingError("embedding does not record its Chimera graph; pass graph=")
    return ChimeraGraph(*e.chimera)


def _tie_coins(n_reads, dim, seed):
    return np.random.default_rng(seed).random((n_reads, dim)) < 0.5


def unembed(physical_reads, e: Embedding, seed=0, coins=None):
    """Majority vote per chain.

    ``physical_reads`` is ``(R, n)`` with columns ordered as ``e.qubits``.
    Returns ``(logical_reads, chain_break_flags)``.  Exact ties take the value
    of a coin: ``coins`` (``(R, dim)`` booleans) if given, otherwise drawn from
    ``default_rng(seed)``.
    """
    reads = np.atleast_2d(np.asarray(physical_reads))
    n = len(e.qubits)
    if reads.shape[1] != n:
        raise ValueError(f"reads have {reads.shape[1]} columns, embedding uses {n} qubits")
    pos = {q: i for i, q in enumerate(e.qubits)}
    logical = np.empty((reads.shape[0], e.dim), dtype=np.uint8)
    broken = np.zeros(reads.shape[0], dtype=bool)
    for i, chain in enumerate(e.chains):
        vals = reads[:, [pos[q] for q in chain]].astype(np.int64)
        ones = vals.sum(axis=1)
        twice, size = 2 * ones, len(chain)
        logical[:, i] = twice > size
        broken |= (ones != 0) & (ones != size)
        tie = twice == size
        if np.any(tie):
            if coins is None:
                coins = _tie_coins(reads.shape[0], e.dim, seed)
            logical[tie, i] = coins[tie, i]
    return logical, broken


def chain_image(logical_state, e: Embedding) -> np.ndarray:
    """Physical read in ``e.qubits`` order that copies each logical value along its chain."""
    x = np.asarray(logical_state)
    pos = {q: i for i, q in enumerate(e.qubits)}
    out = np.zeros(len(e.qubits), dtype=np.uint8)
    for v, chain in zip(x, e.chains):
        for q in chain:
            out[pos[q]] = v
    return out
