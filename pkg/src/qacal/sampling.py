"""Latin hypercube sampling of corrections, batch evaluation, dataset files."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ._io import atomic_write_text, dump_json, provenance_comment
from .qubo import Metrics, QuboProblem, RangeBounds, compute_metrics, dq_ranges

METRIC_COLUMNS = ("success_rate", "mean_relative_energy", "chain_break_fraction")
KEYINGS = ("index", "content")


class DatasetFormatError(ValueError):
    pass


def derive_seed(*parts) -> int:
    """Deterministic 63-bit seed from integer parts (the documented split function)."""
    state = np.random.SeedSequence([int(p) for p in parts]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 31 | int(state[1]) >> 1


def content_seed(seed: int, values) -> int:
    digest = hashlib.sha256(np.ascontiguousarray(values, dtype=float).tobytes()).digest()
    return derive_seed(seed, int.from_bytes(digest[:8], "little"))


def lhs(bounds: RangeBounds, m: int, seed: int = 0) -> np.ndarray:
    """Latin hypercube sample of ``m`` points in the box, as an ``(m, P)`` array.

    In every dimension the points fall one per stratum of ``m`` equal-width
    strata, at a uniform position inside the stratum; the stratum order is an
    independent random permutation per dimension.
    """
    if m < 1:
        raise ValueError("latin hypercube sampling needs m >= 1")
    rng = np.random.default_rng(seed)
    p = len(bounds)
    strata = rng.permuted(np.tile(np.arange(m), (p, 1)), axis=1).T
    unit = (strata + rng.random((m, p))) / m
    pts = bounds.lower + bounds.width * unit
    return np.clip(pts, bounds.lower, bounds.upper)


@dataclass(eq=False)
class CalibrationDataset:
    """Evaluated corrections: one row per ``dQ`` with its measured metrics.

    Stored column-wise.  Rows whose evaluation failed keep their place with
    NaN metrics and ``failed == True``.
    """

    dq: np.ndarray
    success_rate: np.ndarray
    mean_relative_energy: np.ndarray
    chain_break_fraction: np.ndarray
    failed: np.ndarray = None
    problem_id: str = ""
    eta: Optional[float] = None
    reads_per_row: int = 0
    seed: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dq = np.asarray(self.dq, dtype=float)
        if self.dq.ndim != 2:
            self.dq = self.dq.reshape(-1, self.metadata.get("num_params", 0))
        n = self.dq.shape[0]
        for name in METRIC_COLUMNS:
            col = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if col.shape != (n,):
                raise ValueError(f"column {name} has {col.size} values, expected {n}")
            setattr(self, name, col)
        self.failed = (np.zeros(n, dtype=bool) if self.failed is None
                       else np.asarray(self.failed, dtype=bool))

    def __len__(self):
        return self.dq.shape[0]

    @property
    def num_params(self) -> int:
        return self.dq.shape[1]

    @property
    def failures(self) -> int:
        return int(np.count_nonzero(self.failed))

    def metrics(self, i: int) -> Metrics:
        sr = self.success_rate[i]
        return Metrics(None if math.isnan(sr) else float(sr), float(self.mean_relative_energy[i]),
                       float(self.chain_break_fraction[i]), self.reads_per_row)

    def rows(self):
        for i in range(len(self)):
            yield self.dq[i], self.metrics(i)

    def subset(self, index) -> "CalibrationDataset":
        index = np.asarray(index)
        return CalibrationDataset(
            self.dq[index], self.success_rate[index], self.mean_relative_energy[index],
            self.chain_break_fraction[index], self.failed[index], self.problem_id, self.eta,
            self.reads_per_row, self.seed, dict(self.metadata))

    def valid(self) -> "CalibrationDataset":
        """Dataset without failed rows."""
        return self.subset(np.flatnonzero(~self.failed))

    def equals(self, other: "CalibrationDataset") -> bool:
        same = lambda a, b: np.array_equal(a, b, equal_nan=True)
        return (same(self.dq, other.dq) and all(same(getattr(self, c), getattr(other, c))
                                               for c in METRIC_COLUMNS)
                and np.array_equal(self.failed, other.failed)
                and (self.problem_id, self.eta, self.reads_per_row, self.seed, self.metadata)
                == (other.problem_id, other.eta, other.reads_per_row, other.seed, other.metadata))

    # -- persistence ------------------------------------------------------

    def save(self, path, provenance=None) -> None:
        save_dataset(path, self, provenance)

    @classmethod
    def load(cls, path) -> "CalibrationDataset":
        return load_dataset(path)


def evaluate_batch(q0: QuboProblem, matrices, backend, embedding, reads_per_row: int,
                   seed: int = 0, eta: Optional[float] = None, keying: str = "index",
                   on_error=None) -> CalibrationDataset:
    """Submit ``q0 + dQ`` for every row of ``matrices`` and score it on ``q0``.

    Row seeds are ``derive_seed(seed, row_index)`` by default; with
    ``keying="content"`` they are derived from the bytes of the row instead,
    so the result no longer depends on row order.  Backend failures
    (:class:`~qacal.remote.SamplerError`) mark the row failed and the campaign
    continues; ``on_error(row, exc)`` is called for each one.
    """
    from .remote import SamplerError

    if keying not in KEYINGS:
        raise ValueError(f"keying must be one of {KEYINGS}")
    if q0.ground_energy is None:
        raise ValueError("q0 needs a known ground energy")
    matrices = np.atleast_2d(np.asarray(matrices, dtype=float))
    if matrices.shape[1] != q0.num_free:
        raise ValueError(f"matrices have {matrices.shape[1]} columns, problem has {q0.num_free}")
    if eta is not None:
        box = dq_ranges(q0, eta)
        outside = [i for i, m in enumerate(matrices) if not box.contains(m)]
        if outside:
            raise ValueError(f"rows {outside[:5]} lie outside the eta={eta} correction box")
    n = matrices.shape[0]
    cols = {c: np.full(n, np.nan) for c in METRIC_COLUMNS}
    failed = np.zeros(n, dtype=bool)
    base = q0.flat()
    for i, dq in enumerate(matrices):
        row_seed = derive_seed(seed, i) if keying == "index" else content_seed(seed, dq)
        try:
            ss = backend.sample(q0.with_flat(base + dq), embedding, reads_per_row, row_seed,
                                reference=q0)
        except SamplerError as exc:
            failed[i] = True
            if on_error is not None:
                on_error(i, exc)
            continue
        m = compute_metrics(ss, q0)
        cols["success_rate"][i] = m.success_rate
        cols["mean_relative_energy"][i] = m.mean_relative_energy
        cols["chain_break_fraction"][i] = m.chain_break_fraction
    meta = {"keying": keying, "num_params": q0.num_free}
    if embedding is not None:
        meta["embedding"] = [list(c) for c in embedding.chains]
    return CalibrationDataset(matrices, failed=failed, problem_id=q0.problem_id(), eta=eta,
                              reads_per_row=reads_per_row, seed=seed, metadata=meta, **cols)


# -- CSV + JSON sidecar ------------------------------------------------------------

def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def _header(p: int) -> list:
    return [f"dq_{i}" for i in range(p)] + list(METRIC_COLUMNS)


def save_dataset(path, ds: CalibrationDataset, provenance=None) -> None:
    """Write ``path`` (CSV) plus a JSON sidecar with the campaign metadata."""
    lines = [provenance_comment(provenance), ",".join(_header(ds.num_params)) + "\n"]
    for i in range(len(ds)):
        vals = list(ds.dq[i]) + [getattr(ds, c)[i] for c in METRIC_COLUMNS]
        lines.append(",".join(repr(float(v)) for v in vals) + "\n")
    atomic_write_text(path, "".join(lines))
    meta = {
        "problem_id": ds.problem_id,
        "eta": ds.eta,
        "reads_per_row": ds.reads_per_row,
        "seed": ds.seed,
        "num_params": ds.num_params,
        "num_rows": len(ds),
        "failed_rows": [int(i) for i in np.flatnonzero(ds.failed)],
        "metadata": ds.metadata,
    }
    if provenance:
        meta["provenance"] = provenance
    atomic_write_text(sidecar_path(path), dump_json(meta))


def load_dataset(path) -> CalibrationDataset:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file {path} not found")
    side = sidecar_path(path)
    if not side.exists():
        raise FileNotFoundError(f"dataset sidecar {side} not found")
    try:
        meta = json.loads(side.read_text(encoding="utf-8"))
        p = int(meta["num_params"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DatasetFormatError(f"corrupt sidecar {side}: {exc}") from exc
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines()
             if ln and not ln.startswith("#")]
    if not lines:
        raise DatasetFormatError(f"{path} has no header")
    header = lines[0].split(",")
    if header != _header(p):
        raise DatasetFormatError(
            f"{path}: header has {len(header)} columns, expected {p + len(METRIC_COLUMNS)}"
            f" (dq_0..dq_{p - 1} + metrics)")
    width = p + len(METRIC_COLUMNS)
    data = np.empty((len(lines) - 1, width))
    for r, ln in enumerate(lines[1:]):
        fields = ln.split(",")
        if len(fields) != width:
            raise DatasetFormatError(f"{path}: row {r} has {len(fields)} fields, expected {width}")
        try:
            data[r] = [float(f) for f in fields]
        except ValueError as exc:
            raise DatasetFormatError(f"{path}: row {r} is corrupt: {exc}") from exc
    failed = np.zeros(data.shape[0], dtype=bool)
    failed[[i for i in meta.get("failed_rows", []) if i < data.shape[0]]] = True
    return CalibrationDataset(
        data[:, :p].reshape(-1, p), data[:, p], data[:, p + 1], data[:, p + 2], failed,
        problem_id=meta.get("problem_id", ""), eta=meta.get("eta"),
        reads_per_row=int(meta.get("reads_per_row", 0)), seed=int(meta.get("seed", 0)),
        metadata=meta.get("metadata", {}))
