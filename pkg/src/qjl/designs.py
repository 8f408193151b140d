"""Finite unitary designs and their moment superoperators.

Superoperators act on column-stacked operators: ``vec(M)`` stacks the columns
of ``M``, so ``vec(A M B) = (B.T kron A) vec(M)`` and the t-fold conjugation
``M -> W M W^dagger`` with ``W = V^{kron t}`` has matrix ``conj(W) kron W``.
With this convention the Frobenius norm of ``M`` is the 2-norm of ``vec(M)``,
so TPE parameters are plain spectral norms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .circuits import GateCircuit
from .linalg import check_unitary
from .sampling import RngStream, as_generator, sample_haar_unitaries

MAX_SUPEROP_DIM = 2**16
MAX_ITERATED_SIZE = 2**14


@dataclass
class FiniteDesign:
    """A uniformly weighted set of unitaries.

    Small designs carry their members explicitly in ``unitaries``
    (shape ``(s, d, d)``). Circuit designs carry a ``circuit_sampler`` that
    maps an :class:`RngStream` to one member.
    """

    dim: int
    unitaries: np.ndarray | None = None
    circuit_sampler: Callable[[RngStream], GateCircuit] | None = None
    cardinality: int | None = None

    def __post_init__(self):
        if (self.unitaries is None) == (self.circuit_sampler is None):
            raise ValueError("give exactly one of unitaries or circuit_sampler")
        if self.unitaries is not None:
            u = np.asarray(self.unitaries, dtype=complex)
            if u.ndim == 2:
                u = u[None]
            if u.shape[1:] != (self.dim, self.dim):
                raise ValueError(f"members must be {self.dim}x{self.dim}, got {u.shape[1:]}")
            for member in u:
                check_unitary(member)
            self.unitaries = u
            self.cardinality = len(u)

    @property
    def explicit(self) -> bool:
        return self.unitaries is not None

    @classmethod
    def from_unitaries(cls, unitaries) -> "FiniteDesign":
        u = np.asarray(unitaries, dtype=complex)
        if u.ndim == 2:
            u = u[None]
        return cls(dim=u.shape[-1], unitaries=u)

    def sample(self, rng) -> np.ndarray | GateCircuit:
        if self.explicit:
            return self.unitaries[as_generator(rng).integers(len(self.unitaries))]
        if not isinstance(rng, RngStream):
            raise TypeError("circuit designs are sampled from an RngStream")
        return self.circuit_sampler(rng)


@dataclass
class MomentSuperoperator:
    matrix: np.ndarray
    dim: int
    order: int

    def apply(self, m) -> np.ndarray:
        n = self.dim**self.order
        m = np.asarray(m, dtype=complex)
        out = self.matrix @ m.reshape(-1, order="F")
        return out.reshape(n, n, order="F")

    def trace_of_identity_image(self) -> float:
        return float(np.trace(self.apply(np.eye(self.dim**self.order))).real)


def pauli_group() -> np.ndarray:
    return np.array(
        [
            [[1, 0], [0, 1]],
            [[0, 1], [1, 0]],
            [[0, -1j], [1j, 0]],
            [[1, 0], [0, -1]],
        ],
        dtype=complex,
    )


def _strip_phase(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    k = np.argmax(np.abs(flat) > 1e-9)
    return u * (abs(flat[k]) / flat[k])


def single_qubit_clifford_group() -> np.ndarray:
    """The 24 single-qubit Cliffords modulo global phase (closure of H and S)."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.array([[1, 0], [0, 1j]], dtype=complex)
    seen: dict[bytes, np.ndarray] = {}
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        nxt = []
        for g in frontier:
            g = _strip_phase(g)
            key = (np.round(g, 8) + 0.0).tobytes()
            if key in seen:
                continue
            seen[key] = g
            nxt.extend([h @ g, s @ g])
        frontier = nxt
    return np.array(list(seen.values()))


def _check_superop_size(d: int, t: int):
    if t < 1:
        raise ValueError("order must be at least 1")
    if d ** (2 * t) > MAX_SUPEROP_DIM:
        raise ValueError(f"d^(2t) = {d ** (2 * t)} exceeds the guard {MAX_SUPEROP_DIM}")


def _tensor_power(u: np.ndarray, t: int) -> np.ndarray:
    # batched kron power over the leading axis
    out = u
    for _ in range(t - 1):
        out = np.einsum("nab,ncd->nacbd", out, u).reshape(len(u), out.shape[1] * u.shape[1], -1)
    return out


def _average_conjugation(unitaries: np.ndarray, t: int, chunk: int = 256) -> np.ndarray:
    n = unitaries.shape[-1] ** t
    acc = np.zeros((n * n, n * n), dtype=complex)
    for start in range(0, len(unitaries), chunk):
        w = _tensor_power(unitaries[start : start + chunk], t)
        acc += np.einsum("kab,kcd->acbd", w.conj(), w).reshape(n * n, n * n)
    return acc / len(unitaries)


def design_moment_superoperator(design: FiniteDesign, t: int) -> MomentSuperoperator:
    if not design.explicit:
        raise ValueError("moment superoperators need an explicit design")
    _check_superop_size(design.dim, t)
    return MomentSuperoperator(_average_conjugation(design.unitaries, t), design.dim, t)


def _permutation_operator(d: int, perm: Sequence[int]) -> np.ndarray:
    """Operator permuting the tensor factors of (C^d)^{kron t}."""
    t = len(perm)
    eye = np.eye(d**t, dtype=complex).reshape((d,) * t + (d**t,))
    return np.moveaxis(eye, list(range(t)), list(perm)).reshape(d**t, d**t)


def haar_moment_superoperator(d: int, t: int, method: str = "exact", samples: int = 10**6,
                              rng=None) -> MomentSuperoperator:
    """Haar t-fold twirl for ``t`` in {1, 2}.

    ``method="exact"`` projects (Hilbert-Schmidt orthogonally) onto the span of
    the tensor-factor permutation operators, which is the commutant of
    ``U^{kron t}``. ``method="monte-carlo"`` averages ``samples`` Haar draws and
    is only meant as a cross-check.
    """
    if t not in (1, 2):
        raise ValueError(f"unsupported order t={t}; only 1 and 2 are available")
    _check_superop_size(d, t)
    if method == "monte-carlo":
        return haar_moment_superoperator_mc(d, t, samples, rng)[0]
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    perms = [_permutation_operator(d, p) for p in itertools.permutations(range(t))]
    vecs = np.array([p.reshape(-1, order="F") for p in perms]).T
    gram = vecs.conj().T @ vecs
    matrix = vecs @ np.linalg.pinv(gram) @ vecs.conj().T
    return MomentSuperoperator(matrix, d, t)


def haar_moment_superoperator_mc(d: int, t: int, samples: int, rng, chunk: int = 20000):
    """Monte-Carlo Haar twirl and the entrywise standard error of the mean."""
    gen = as_generator(rng if rng is not None else RngStream(0))
    n = d**t
    total = np.zeros((n * n, n * n), dtype=complex)
    total_sq = np.zeros((n * n, n * n))
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        w = _tensor_power(sample_haar_unitaries(k, d, gen), t)
        terms = np.einsum("kab,kcd->kacbd", w.conj(), w).reshape(k, n * n, n * n)
        total += terms.sum(axis=0)
        total_sq += (np.abs(terms) ** 2).sum(axis=0)
        done += k
    mean = total / samples
    var = np.maximum(total_sq / samples - np.abs(mean) ** 2, 0.0)
    return MomentSuperoperator(mean, d, t), np.sqrt(var / samples)


def estimate_tpe_lambda(design: FiniteDesign, t: int) -> float:
    """Smallest lambda for which ``design`` is a (d, s, lambda, t)-TPE."""
    diff = design_moment_superoperator(design, t).matrix - haar_moment_superoperator(design.dim, t).matrix
    return float(np.linalg.norm(diff, 2))


def iterate_design(design: FiniteDesign, times: int) -> FiniteDesign:
    """The k-fold product design ``{V_{i1} V_{i2} ... V_{ik}}``."""
    if times < 1:
        raise ValueError("need at least one factor")
    if design.explicit:
        s = len(design.unitaries)
        if s**times > MAX_ITERATED_SIZE:
            raise ValueError(f"s^k = {s ** times} exceeds the guard {MAX_ITERATED_SIZE}")
        members = design.unitaries
        for _ in range(times - 1):
            members = np.einsum("iab,jbc->ijac", members, design.unitaries).reshape(-1, design.dim, design.dim)
        return FiniteDesign.from_unitaries(members)

    base = design.circuit_sampler

    def sampler(stream: RngStream) -> GateCircuit:
        return reduce(lambda a, b: a + b, (base(stream.child(i)) for i in range(times)))

    card = None if design.cardinality is None else design.cardinality**times
    return FiniteDesign(dim=design.dim, circuit_sampler=sampler, cardinality=card)


class MonomialError(NamedTuple):
    gap: float
    alpha: float


def _weingarten(d: int, t: int, cycle_type: tuple) -> float:
    if t == 1:
        return 1.0 / d
    if d < 2:
        raise ValueError("degree-2 Weingarten values need d >= 2")
    if cycle_type == (1, 1):
        return 1.0 / (d * d - 1)
    return -1.0 / (d * (d * d - 1))


def _cycle_type(perm: tuple) -> tuple:
    seen, lengths = set(), []
    for start in range(len(perm)):
        if start in seen:
            continue
        n, k = 0, start
        while k not in seen:
            seen.add(k)
            k = perm[k]
            n += 1
        lengths.append(n)
    return tuple(sorted(lengths, reverse=True))


def haar_monomial_expectation(d: int, unconjugated, conjugated) -> float:
    """``E[prod u_{ij} prod conj(u_{kl})]`` under Haar, via Weingarten sums.

    Index pairs are 1-based. Degrees 1 and 2 only.
    """
    t = len(unconjugated)
    if t not in (1, 2) or len(conjugated) != t:
        raise ValueError("balanced monomials of degree 1 or 2 only")
    total = 0.0
    for sigma in itertools.permutations(range(t)):
        if any(unconjugated[a][0] != conjugated[sigma[a]][0] for a in range(t)):
            continue
        for tau in itertools.permutations(range(t)):
            if any(unconjugated[a][1] != conjugated[tau[a]][1] for a in range(t)):
                continue
            rel = tuple(tau[sigma.index(a)] for a in range(t))
            total += _weingarten(d, t, _cycle_type(rel))
    return total


def _check_monomial(monomial, d: int, t: int):
    try:
        unconj, conj = monomial
        unconj = [tuple(int(x) for x in pair) for pair in unconj]
        conj = [tuple(int(x) for x in pair) for pair in conj]
    except (TypeError, ValueError) as exc:
        raise ValueError("monomial must be two lists of (row, col) pairs") from exc
    if len(unconj) != t or len(conj) != t:
        raise ValueError(f"monomial is not balanced of degree {t}")
    for i, j in unconj + conj:
        if not (1 <= i <= d and 1 <= j <= d):
            raise ValueError(f"entry ({i}, {j}) outside a {d}x{d} matrix")
    return unconj, conj


def monomial_design_error(design: FiniteDesign, monomial, t: int) -> MonomialError:
    """Gap between design and Haar averages of one balanced monomial.

    ``monomial`` is ``(unconjugated, conjugated)``, each a list of ``t``
    1-based ``(row, col)`` pairs. Returns the gap and ``alpha = gap * d**t``.
    """
    if not design.explicit:
        raise ValueError("monomial errors need an explicit design")
    d = design.dim
    unconj, conj = _check_monomial(monomial, d, t)
    u = design.unitaries
    vals = np.ones(len(u), dtype=complex)
    for i, j in unconj:
        vals = vals * u[:, i - 1, j - 1]
    for i, j in conj:
        vals = vals * u[:, i - 1, j - 1].conj()
    gap = float(abs(vals.mean() - haar_monomial_expectation(d, unconj, conj)))
    return MonomialError(gap, gap * d**t)


def balanced_monomials(d: int, t: int):
    """All balanced degree-t monomials on a d x d matrix (as index-pair lists)."""
    entries = [(i, j) for i in range(1, d + 1) for j in range(1, d + 1)]
    for unconj in itertools.product(entries, repeat=t):
        for conj in itertools.product(entries, repeat=t):
            yield list(unconj), list(conj)
