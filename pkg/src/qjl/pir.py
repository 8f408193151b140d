"""Two-party quantum private information retrieval built on the quantum JL transform.

Alice holds ``S`` (a subset of ``[m]``, elements 1-based), Bob holds ``x``.

1. Bob draws ``U`` (the public coin), applies it to ``|x>`` ``reps`` times,
   measures a block name each time and keeps the collapsed states.
2. Alice projects ``U|S>`` onto each named block and returns the normalized
   projections.
3. Bob SWAP-tests each pair and declares ``x in S`` when the success fraction
   exceeds ``1/2 + 0.2/n``.

SWAP tests are sampled from their exact success probability
``1/2 + |<a|b>|^2 / 2``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._validation import is_power_of_two
from .circuits import generate_local_random_circuit
from .jl import as_operator
from .linalg import NORM_TOL, BlockStructure, basis_state, l1_distance
from .sampling import RngStream, as_generator, derive_seed, sample_haar_unitary

SEED_BITS = 64


@dataclass(frozen=True)
class PirParams:
    m: int = 256
    n: int = 4
    d2: int = 64
    eps: float = 0.25
    c_rep: int = 16

    def __post_init__(self):
        if not is_power_of_two(self.m):
            raise ValueError(f"universe size m must be a power of 2, got {self.m}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.c_rep < 1:
            raise ValueError("c_rep must be positive")
        BlockStructure(self.m, self.d2)

    @property
    def reps(self) -> int:
        return self.c_rep * self.n**2

    @property
    def threshold(self) -> float:
        return 0.5 + 0.2 / self.n

    @property
    def blocks(self) -> BlockStructure:
        return BlockStructure(self.m, self.d2)

    @property
    def num_qubits(self) -> int:
        return self.m.bit_length() - 1

    def asymptotic_eps(self) -> float:
        """The asymptotic choice ``0.01 / n^3``, kept for reporting."""
        return 0.01 / self.n**3


@dataclass(frozen=True)
class UnitaryDescriptor:
    """What Bob sends as the public coin: a seed (and circuit size)."""

    kind: str = "haar"
    seed: int = 0
    circuit_size: int = 0

    def __post_init__(self):
        if self.kind not in ("haar", "circuit", "identity"):
            raise ValueError(f"unknown unitary kind {self.kind!r}")

    @property
    def bits(self) -> int:
        if self.kind == "identity":
            return 0
        if self.kind == "haar":
            return SEED_BITS
        return SEED_BITS + max(1, self.circuit_size.bit_length())

    def build(self, m: int):
        return _build_unitary(self.kind, self.seed, self.circuit_size, m)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "circuit_size": self.circuit_size}


@lru_cache(maxsize=16)
def _build_unitary(kind: str, seed: int, circuit_size: int, m: int):
    stream = RngStream(seed, 0)
    if kind == "identity":
        return np.eye(m, dtype=complex)
    if kind == "haar":
        return sample_haar_unitary(m, stream)
    return generate_local_random_circuit(m.bit_length() - 1, circuit_size, stream)


def membership_state(S, m: int) -> np.ndarray:
    """``|S> = |S|^{-1/2} sum_{y in S} |y>``."""
    S = sorted(set(int(y) for y in S))
    if not S:
        raise ValueError("S must be nonempty")
    if S[0] < 1 or S[-1] > m:
        raise ValueError(f"elements of S must lie in [1, {m}]")
    v = np.zeros(m, dtype=complex)
    v[np.array(S) - 1] = 1.0 / math.sqrt(len(S))
    return v


def _check_element(x: int, m: int) -> int:
    if not 1 <= x <= m:
        raise ValueError(f"x must lie in [1, {m}], got {x}")
    return int(x)


def _blocks_of_image(v, descriptor: UnitaryDescriptor, params: PirParams) -> np.ndarray:
    w = as_operator(descriptor.build(params.m))(v)
    return params.blocks.blocks(w)


def bob_phase1(x: int, descriptor: UnitaryDescriptor, params: PirParams, rng):
    """Measure ``reps`` block names of ``U|x>``; return names and collapsed states."""
    _check_element(x, params.m)
    blocks = _blocks_of_image(basis_state(params.m, x), descriptor, params)
    probs = np.sum(np.abs(blocks) ** 2, axis=1)
    names = as_generator(rng).choice(len(probs), size=params.reps, p=probs / probs.sum())
    states = [blocks[j] / math.sqrt(probs[j]) for j in names]
    return [int(j) + 1 for j in names], states


def alice_respond(S, descriptor: UnitaryDescriptor, block_names, params: PirParams):
    """Normalized projections of ``U|S>`` onto the named blocks.

    A block where the projection vanishes yields ``None`` (the null state).
    """
    bs = params.blocks
    for j in block_names:
        bs.check_block(j)
    blocks = _blocks_of_image(membership_state(S, params.m), descriptor, params)
    norms = np.linalg.norm(blocks, axis=1)
    out = []
    for j in block_names:
        nj = norms[j - 1]
        out.append(None if nj <= NORM_TOL else blocks[j - 1] / nj)
    return out


def swap_success_probability(a, b) -> float:
    if a is None or b is None:
        return 0.5
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    for s in (a, b):
        if abs(np.linalg.norm(s) - 1) > 1e-9:
            raise ValueError("SWAP test inputs must be unit vectors")
    return 0.5 + 0.5 * abs(np.vdot(a, b)) ** 2


def swap_test(a, b, rng) -> int:
    """One SWAP test: 1 (success) with probability ``1/2 + |<a|b>|^2 / 2``."""
    return int(as_generator(rng).random() < swap_success_probability(a, b))


def bob_decide(swap_outcomes, n: int) -> bool:
    outcomes = np.asarray(swap_outcomes, dtype=float)
    if outcomes.size == 0:
        raise ValueError("no SWAP outcomes")
    return bool(outcomes.mean() > 0.5 + 0.2 / n)


@dataclass
class ProtocolTranscript:
    S: list[int]
    x: int
    params: PirParams
    unitary_descriptor: UnitaryDescriptor
    block_names: list[int]
    alice_states: list
    swap_outcomes: list[int]
    overlaps: list[float] = field(default_factory=list)

    @property
    def success_fraction(self) -> float:
        return float(np.mean(self.swap_outcomes))

    @property
    def decision(self) -> bool:
        return bob_decide(self.swap_outcomes, self.params.n)

    @property
    def x_in_S(self) -> bool:
        return self.x in self.S

    @property
    def correct(self) -> bool:
        return self.decision == self.x_in_S

    @property
    def bob_bits(self) -> int:
        return self.unitary_descriptor.bits + self.params.reps * int(math.log2(self.params.m // self.params.d2))

    @property
    def alice_qubits(self) -> int:
        return self.params.reps * int(math.log2(self.params.d2))

    def to_dict(self) -> dict:
        def encode(state):
            if state is None:
                return None
            return [[float(z.real), float(z.imag)] for z in state]

        p = self.params
        return {
            "S": list(self.S),
            "x": self.x,
            "params": {"m": p.m, "n": p.n, "d2": p.d2, "eps": p.eps, "c_rep": p.c_rep,
                       "reps": p.reps, "threshold": p.threshold},
            "unitary_descriptor": self.unitary_descriptor.to_dict(),
            "block_names": list(self.block_names),
            "alice_states": [encode(s) for s in self.alice_states],
            "swap_outcomes": list(self.swap_outcomes),
            "overlaps": [float(o) for o in self.overlaps],
            "success_fraction": self.success_fraction,
            "decision": self.decision,
            "x_in_S": self.x_in_S,
            "correct": self.correct,
            "bob_bits": self.bob_bits,
            "alice_qubits": self.alice_qubits,
        }

    CSV_COLUMNS = ("x", "x_in_S", "decision", "correct", "success_fraction", "bob_bits", "alice_qubits")

    def csv_row(self) -> dict:
        return {k: getattr(self, k) for k in self.CSV_COLUMNS}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.CSV_COLUMNS)
        w.writeheader()
        w.writerow(self.csv_row())
        return buf.getvalue()


def run_protocol(S, x: int, params: PirParams, master_seed: int,
                 descriptor: UnitaryDescriptor | None = None) -> ProtocolTranscript:
    """Run all three steps. Streams 1 and 2 of ``master_seed`` drive Bob's
    measurements and the SWAP tests; the default public coin is a Haar unitary
    seeded from stream 0.
    """
    S = sorted(set(int(y) for y in S))
    if len(S) > params.n:
        raise ValueError(f"|S| = {len(S)} exceeds n = {params.n}")
    _check_element(x, params.m)
    if descriptor is None:
        descriptor = UnitaryDescriptor("haar", derive_seed(master_seed, 0))
    names, bob_states = bob_phase1(x, descriptor, params, RngStream(master_seed, 1))
    alice_states = alice_respond(S, descriptor, names, params)
    gen = RngStream(master_seed, 2).generator()
    probs = np.array([swap_success_probability(a, b) for a, b in zip(alice_states, bob_states)])
    outcomes = (gen.random(len(probs)) < probs).astype(int)
    overlaps = np.sqrt(np.clip(2 * probs - 1, 0.0, None))
    return ProtocolTranscript(S, int(x), params, descriptor, names, alice_states,
                              outcomes.tolist(), overlaps.tolist())


def block_name_distribution(x: int, descriptor: UnitaryDescriptor, params: PirParams) -> np.ndarray:
    """Exact distribution of one of Bob's block names for element ``x``."""
    blocks = _blocks_of_image(basis_state(params.m, _check_element(x, params.m)), descriptor, params)
    probs = np.sum(np.abs(blocks) ** 2, axis=1)
    return probs / probs.sum()


@dataclass
class PrivacyEstimate:
    metric: float
    stderr: float
    per_probe: dict[int, float]

    def to_dict(self) -> dict:
        return {"metric": self.metric, "stderr": self.stderr,
                "per_probe": {str(k): v for k, v in self.per_probe.items()}}


def privacy_metric(params: PirParams, descriptor: UnitaryDescriptor, probe_elements, runs_per_x: int,
                   master_seed: int = 0, bootstrap: int = 200) -> PrivacyEstimate:
    """Max over probes of the l1 distance between Bob's empirical block names and uniform.

    Each run contributes ``reps`` block names; within a run they are iid
    given ``U``, so the counts over all runs are a single multinomial draw.
    The standard error comes from a parametric bootstrap of the max.
    """
    probes = [int(x) for x in probe_elements]
    if not probes:
        raise ValueError("need at least one probe element")
    if runs_per_x < 1:
        raise ValueError("runs_per_x must be positive")
    total = runs_per_x * params.reps
    k = params.blocks.num_blocks
    uniform = np.full(k, 1.0 / k)
    per_probe, fitted = {}, []
    for i, x in enumerate(probes):
        gen = RngStream(master_seed, i).generator()
        counts = gen.multinomial(total, block_name_distribution(x, descriptor, params))
        p_hat = counts / total
        per_probe[x] = l1_distance(p_hat, uniform)
        fitted.append(p_hat)
    gen = RngStream(master_seed, len(probes)).generator()
    boot = np.zeros(bootstrap)
    for p_hat in fitted:
        draws = gen.multinomial(total, p_hat, size=bootstrap) / total
        boot = np.maximum(boot, np.abs(draws - uniform).sum(axis=1))
    return PrivacyEstimate(max(per_probe.values()), float(boot.std(ddof=1)), per_probe)
