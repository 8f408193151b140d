"""Classical and quantum Johnson-Lindenstrauss transforms.

Functions taking ``u_or_circuit`` accept a dense unitary (``ndarray``), a
:class:`~qjl.circuits.GateCircuit`, or any callable that applies a fixed linear
map to a ``(d1,)`` or ``(d1, k)`` array (e.g. :class:`~qjl.sampling.HaarRestriction`).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .circuits import GateCircuit, apply_circuit
from .linalg import NORM_TOL, BlockStructure, check_state, polarization_inner_product
from .sampling import as_generator


def as_operator(u_or_circuit):
    if isinstance(u_or_circuit, GateCircuit):
        return lambda x: apply_circuit(u_or_circuit, x)
    if isinstance(u_or_circuit, np.ndarray):
        u = u_or_circuit
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"unitary must be square, got shape {u.shape}")
        return lambda x: u @ x
    if callable(u_or_circuit):
        return u_or_circuit
    raise TypeError(f"cannot apply {type(u_or_circuit).__name__} as a unitary")


def _operator_dim(u_or_circuit) -> int | None:
    if isinstance(u_or_circuit, GateCircuit):
        return u_or_circuit.dim
    if isinstance(u_or_circuit, np.ndarray):
        return u_or_circuit.shape[0]
    return getattr(u_or_circuit, "dim", None)


def _image(v, u_or_circuit, bs: BlockStructure) -> np.ndarray:
    dim = _operator_dim(u_or_circuit)
    if dim is not None and dim != bs.d1:
        raise ValueError(f"dimension mismatch: operator acts on {dim}, blocks need d1={bs.d1}")
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != bs.d1:
        raise ValueError(f"dimension mismatch: expected {bs.d1}, got {v.shape[0]}")
    return np.asarray(as_operator(u_or_circuit)(v), dtype=complex)


def classical_jl(v, u, bs: BlockStructure) -> np.ndarray:
    """``sqrt(d1/d2) * Pi_1 U v``."""
    w = _image(check_state(v), u, bs)
    return np.sqrt(bs.d1 / bs.d2) * w[: bs.d2]


def block_probability_vector(v, u_or_circuit, bs: BlockStructure) -> np.ndarray:
    """Born probabilities ``|Pi_j U v|^2`` of the block names, ``j = 1..d1/d2``."""
    w = _image(check_state(v, normalized=True), u_or_circuit, bs)
    return np.sum(np.abs(bs.blocks(w)) ** 2, axis=1)


@dataclass
class JLOutcome:
    block_index: int
    block_probability: float
    collapsed_state: np.ndarray


def quantum_jl_measure(v, u_or_circuit, bs: BlockStructure, rng) -> JLOutcome:
    """Apply the unitary, measure a block name, and return the collapsed state.

    The block is drawn from the exact Born distribution.
    """
    w = _image(check_state(v, normalized=True), u_or_circuit, bs)
    blocks = bs.blocks(w)
    probs = np.sum(np.abs(blocks) ** 2, axis=1)
    j = int(as_generator(rng).choice(bs.num_blocks, p=probs / probs.sum()))
    return JLOutcome(j + 1, float(probs[j]), blocks[j] / np.sqrt(probs[j]))


@dataclass
class PreservationReport:
    """Norm and inner-product distortion over every block and pair.

    ``norm_deviation[j, i]`` is ``| |Pi_j U v_i| / sqrt(d2/d1) - 1 |``;
    ``inner_deviation[j, p]`` is the error on pair ``pairs[p]``. Cells where a
    projection vanishes are ``nan`` and listed in ``unreachable``.
    """

    d1: int
    d2: int
    eps: float
    pairs: list[tuple[int, int]]
    norm_deviation: np.ndarray
    inner_deviation: np.ndarray
    unreachable: list[tuple[int, int]] = field(default_factory=list)

    @property
    def norm_violations(self) -> list[tuple[int, int]]:
        js, iis = np.nonzero(self.norm_deviation > self.eps)
        return [(int(j) + 1, int(i) + 1) for j, i in zip(js, iis)]

    @property
    def inner_violations(self) -> list[tuple[int, int, int]]:
        js, ps = np.nonzero(self.inner_deviation > 8 * self.eps)
        return [(int(j) + 1, *self.pairs[p]) for j, p in zip(js, ps)]

    @property
    def max_norm_deviation(self) -> float:
        return float(np.nanmax(self.norm_deviation)) if self.norm_deviation.size else 0.0

    @property
    def max_inner_deviation(self) -> float:
        if not self.inner_deviation.size or np.all(np.isnan(self.inner_deviation)):
            return 0.0
        return float(np.nanmax(self.inner_deviation))

    def to_dict(self) -> dict:
        def clean(a):
            return [[None if np.isnan(x) else float(x) for x in row] for row in a]

        return {
            "d1": self.d1,
            "d2": self.d2,
            "eps": self.eps,
            "pairs": [list(p) for p in self.pairs],
            "norm_deviation": clean(self.norm_deviation),
            "inner_deviation": clean(self.inner_deviation),
            "unreachable": [list(c) for c in self.unreachable],
            "max_norm_deviation": self.max_norm_deviation,
            "max_inner_deviation": self.max_inner_deviation,
            "norm_violations": [list(c) for c in self.norm_violations],
            "inner_violations": [list(c) for c in self.inner_violations],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    CSV_COLUMNS = ("d1", "d2", "eps", "n_states", "max_norm_deviation", "max_inner_deviation",
                   "norm_violations", "inner_violations", "unreachable")

    def csv_row(self) -> dict:
        return {
            "d1": self.d1, "d2": self.d2, "eps": self.eps,
            "n_states": self.norm_deviation.shape[1],
            "max_norm_deviation": self.max_norm_deviation,
            "max_inner_deviation": self.max_inner_deviation,
            "norm_violations": len(self.norm_violations),
            "inner_violations": len(self.inner_violations),
            "unreachable": len(self.unreachable),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.CSV_COLUMNS)
        writer.writeheader()
        writer.writerow(self.csv_row())
        return buf.getvalue()


def pairwise_preservation_report(states, u_or_circuit, bs: BlockStructure, eps: float) -> PreservationReport:
    """Check norm and inner-product preservation for every block and pair.

    Collapsed-state inner products are rebuilt with the polarization identity,
    mirroring how the guarantee is argued from norm preservation.
    """
    states = [check_state(s, normalized=True, dim=bs.d1) for s in states]
    if not states:
        raise ValueError("need at least one state")
    n = len(states)
    v = np.stack(states, axis=1)
    blocks = bs.blocks(_image(v, u_or_circuit, bs))  # (num_blocks, d2, n)
    norms = np.linalg.norm(blocks, axis=1)  # (num_blocks, n)
    scale = np.sqrt(bs.d2 / bs.d1)

    dead = norms <= NORM_TOL
    unreachable = [(int(j) + 1, int(i) + 1) for j, i in zip(*np.nonzero(dead))]
    safe = np.where(dead, 1.0, norms)
    collapsed = blocks / safe[:, None, :]
    norm_dev = np.where(dead, np.nan, np.abs(norms / scale - 1.0))

    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    inner_dev = np.full((bs.num_blocks, len(pairs)), np.nan)
    if pairs:
        ia = np.array([p[0] for p in pairs])
        ib = np.array([p[1] for p in pairs])
        original = np.einsum("dp,dp->p", v[:, ia].conj(), v[:, ib])
        # (num_blocks, pairs, d2)
        left = np.moveaxis(collapsed[:, :, ia], 1, 2)
        right = np.moveaxis(collapsed[:, :, ib], 1, 2)
        after = polarization_inner_product(left, right)
        inner_dev = np.abs(after - original[None, :])
        inner_dev[dead[:, ia] | dead[:, ib]] = np.nan

    return PreservationReport(
        d1=bs.d1, d2=bs.d2, eps=float(eps),
        pairs=[(a + 1, b + 1) for a, b in pairs],
        norm_deviation=norm_dev, inner_deviation=inner_dev,
        unreachable=unreachable,
    )
