"""HTTP client for an external sampler service.

One endpoint, one JSON POST per sampling call; the request and response
bodies are documented in ``docs/wire_protocol.md``.  Each failure mode raises
its own exception so callers can tell a dead host from a broken server.
"""
from __future__ import annotations

import json
import os
import socket
import urllib.error
import urllib.request
from typing import Optional

import numpy as np

from .annealer import SampleSet
from .qubo import QuboProblem, energies

ENDPOINT_ENV = "QACAL_SAMPLER_URL"
DEFAULT_TIMEOUT = 30.0


class SamplerError(RuntimeError):
    """Base class for backend failures."""


class SamplerNetworkError(SamplerError):
    """The endpoint could not be reached or timed out."""


class SamplerHTTPError(SamplerError):
    def __init__(self, status: int, body: str = ""):
        super().__init__(f"sampler returned HTTP {status}: {body[:200]}")
        self.status = status


class MalformedResponseError(SamplerError):
    """The response body is not a valid sample-set document."""


def encode_request(q: QuboProblem, num_reads: int, seed: Optional[int] = None,
                   params: Optional[dict] = None) -> bytes:
    body = {
        "qubo": [[int(i), int(j), float(q.entries[i, j])] for i, j in zip(*np.nonzero(q.entries))],
        "num_variables": q.dim,
        "num_reads": int(num_reads),
        "annealing": dict(params or {}),
    }
    if seed is not None:
        body["seed"] = int(seed)
    return json.dumps(body, sort_keys=True).encode("utf-8")


def decode_response(raw: bytes, dim: int, num_reads: int) -> dict:
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedResponseError(f"response is not JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedResponseError("response must be a JSON object")
    try:
        reads = np.asarray(doc["reads"])
        given = np.asarray(doc["energies"], dtype=float)
        cbf = float(doc.get("chain_break_fraction", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedResponseError(f"missing or invalid field: {exc}") from exc
    if reads.ndim != 2 or reads.shape != (num_reads, dim):
        raise MalformedResponseError(
            f"expected {num_reads} reads of length {dim}, got shape {reads.shape}")
    if not np.isin(reads, (0, 1)).all():
        raise MalformedResponseError("reads must be binary")
    if given.shape != (num_reads,):
        raise MalformedResponseError("one energy per read required")
    if not 0.0 <= cbf <= 1.0:
        raise MalformedResponseError("chain_break_fraction must lie in [0, 1]")
    flags = doc.get("chain_break_flags")
    if flags is not None:
        flags = np.asarray(flags, dtype=bool)
        if flags.shape != (num_reads,):
            raise MalformedResponseError("one chain-break flag per read required")
    return {"reads": reads.astype(np.uint8), "energies": given, "flags": flags,
            "chain_break_fraction": cbf}


class RemoteSampler:
    """Backend that forwards logical problems to a sampler service.

    The service does its own embedding, so ``embedding`` is ignored.  Energies
    in the returned :class:`SampleSet` are recomputed locally against the
    reference problem; the service's own energies are attached to the sample set
    as ``remote_energies``.
    """

    def __init__(self, endpoint: Optional[str] = None, timeout: float = DEFAULT_TIMEOUT,
                 params: Optional[dict] = None):
        endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise SamplerNetworkError(f"no endpoint given and ${ENDPOINT_ENV} is unset")
        self.endpoint = endpoint
        self.timeout = float(timeout)
        self.params = dict(params or {})

    def sample(self, q: QuboProblem, embedding=None, num_reads: int = 500, seed=None,
               reference: Optional[QuboProblem] = None) -> SampleSet:
        return remote_sample(self.endpoint, q, dict(self.params, num_reads=num_reads, seed=seed),
                             timeout=self.timeout, reference=reference)


def remote_sample(endpoint: str, q: QuboProblem, params: dict, timeout: float = DEFAULT_TIMEOUT,
                  reference: Optional[QuboProblem] = None) -> SampleSet:
    """POST ``q`` to ``endpoint`` and parse the sample set.

    ``params`` carries ``num_reads``, an optional ``seed``, and any annealing
    parameters, which are forwarded verbatim under ``"annealing"``.
    """
    params = dict(params)
    num_reads = int(params.pop("num_reads", 500))
    seed = params.pop("seed", None)
    body = encode_request(q, num_reads, seed, params)
    req = urllib.request.Request(endpoint, data=body, method="POST",
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            raw = resp.read()
    except urllib.error.HTTPError as exc:
        raise SamplerHTTPError(exc.code, exc.read().decode("utf-8", "replace")) from exc
    except (urllib.error.URLError, socket.timeout, ConnectionError, OSError) as exc:
        raise SamplerNetworkError(f"cannot reach sampler at {endpoint}: {exc}") from exc
    parsed = decode_response(raw, q.dim, num_reads)
    ref = q if reference is None else reference
    out = SampleSet(parsed["reads"], energies(parsed["reads"], ref), parsed["flags"], seed,
                    reported_chain_break_fraction=parsed["chain_break_fraction"])
    out.remote_energies = parsed["energies"]
    return out
