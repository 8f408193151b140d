"""Local random quantum circuits on a line of qubits.

Qubit 1 is the most significant bit of the computational-basis index, so the
first block of ``d2 = 2**k`` coordinates is the subspace where the top
``q - k`` qubits are all zero. A gate on pair ``p`` acts on qubits ``(p, p+1)``
with its 4x4 matrix written in the basis ``|q_p q_{p+1}>``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import UNITARY_TOL
from .sampling import as_generator, sample_haar_unitaries

MAX_DENSE_QUBITS = 12


@dataclass
class GateCircuit:
    num_qubits: int
    pairs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    gates: np.ndarray = field(default_factory=lambda: np.zeros((0, 4, 4), dtype=complex))

    def __post_init__(self):
        if self.num_qubits < 2:
            raise ValueError(f"need at least 2 qubits, got {self.num_qubits}")
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1)
        self.gates = np.asarray(self.gates, dtype=complex).reshape(-1, 4, 4)
        if len(self.pairs) != len(self.gates):
            raise ValueError("pairs and gates differ in length")
        if len(self.pairs) and (self.pairs.min() < 1 or self.pairs.max() > self.num_qubits - 1):
            raise ValueError(f"pair index outside [1, {self.num_qubits - 1}]")

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    @property
    def size(self) -> int:
        return len(self.pairs)

    def __len__(self):
        return self.size

    def __add__(self, other: "GateCircuit") -> "GateCircuit":
        """Run ``self`` first, then ``other``."""
        if other.num_qubits != self.num_qubits:
            raise ValueError("cannot concatenate circuits on different qubit counts")
        return GateCircuit(
            self.num_qubits,
            np.concatenate([self.pairs, other.pairs]),
            np.concatenate([self.gates, other.gates]),
        )

    def segment(self, start: int, stop: int) -> "GateCircuit":
        """Gates ``start..stop-1`` as a circuit of their own."""
        return GateCircuit(self.num_qubits, self.pairs[start:stop], self.gates[start:stop])

    def apply(self, v) -> np.ndarray:
        return apply_circuit(self, v)

    def gates_unitary(self, tol: float = UNITARY_TOL) -> bool:
        eye = np.eye(4)
        err = np.linalg.norm(self.gates @ self.gates.conj().transpose(0, 2, 1) - eye, axis=(1, 2))
        return bool(np.all(err <= tol * 4))

    def to_dict(self) -> dict:
        return {
            "num_qubits": int(self.num_qubits),
            "gates": [
                {
                    "pair": int(p),
                    "matrix": [[float(z.real), float(z.imag)] for z in g.reshape(-1)],
                }
                for p, g in zip(self.pairs, self.gates)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "GateCircuit":
        gates = data.get("gates", [])
        pairs = [g["pair"] for g in gates]
        mats = []
        for g in gates:
            entries = np.asarray(g["matrix"], dtype=float)
            if entries.shape != (16, 2):
                raise ValueError("each gate matrix needs 16 [re, im] entries")
            mats.append((entries[:, 0] + 1j * entries[:, 1]).reshape(4, 4))
        return cls(int(data["num_qubits"]), np.asarray(pairs, dtype=np.int64),
                   np.asarray(mats, dtype=complex).reshape(-1, 4, 4))

    @classmethod
    def from_json(cls, text: str) -> "GateCircuit":
        return cls.from_dict(json.loads(text))


def generate_local_random_circuit(q: int, s: int, rng) -> GateCircuit:
    """``s`` Haar-random 2-qubit gates on uniformly random adjacent pairs."""
    if q < 2:
        raise ValueError(f"need at least 2 qubits, got {q}")
    if s < 0:
        raise ValueError("circuit size must be nonnegative")
    gen = as_generator(rng)
    if s == 0:
        return GateCircuit(q)
    pairs = gen.integers(1, q, size=s)
    gates = sample_haar_unitaries(s, 4, gen)
    return GateCircuit(q, pairs, gates)


def apply_circuit(c: GateCircuit, v) -> np.ndarray:
    """Apply ``c`` to a state (shape ``(2**q,)``) or a stack of columns ``(2**q, k)``.

    Works gate by gate on a reshaped view; the dense 2**q matrix is never built.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != c.dim:
        raise ValueError(f"dimension mismatch: circuit acts on {c.dim}, state has {v.shape[0]}")
    out = v.copy()
    tail = out.size // c.dim
    q = c.num_qubits
    for p, g in zip(c.pairs.tolist(), c.gates):
        view = out.reshape(2 ** (p - 1), 4, 2 ** (q - p - 1) * tail)
        out = np.matmul(g, view)
    return out.reshape(v.shape)


def circuit_to_unitary(c: GateCircuit) -> np.ndarray:
    if c.num_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"refusing to build a dense matrix for {c.num_qubits} > {MAX_DENSE_QUBITS} qubits")
    return apply_circuit(c, np.eye(c.dim, dtype=complex))
