"""Seeded random sources.

Every sampler takes an :class:`RngStream` (or an already-built
``numpy.random.Generator``). A stream is identified by ``(master_seed,
stream_id)``; experiments give trial ``i`` the stream id ``i`` so a run can be
split across workers without changing its output.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= value < 2**64:
                raise ValueError(f"{name} must fit in 64 unsigned bits, got {value}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))

    def child(self, stream_id: int) -> "RngStream":
        """A stream keyed under this one, for experiments nested inside a trial."""
        return RngStream(derive_seed(self.master_seed, self.stream_id), stream_id)


def derive_seed(master_seed: int, *keys: int) -> int:
    """Deterministic 64-bit seed from a master seed and a key path."""
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(keys))
    return int(seq.generate_state(1, np.uint64)[0])


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def sample_gaussians(n: int, rng) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one sample")
    return as_generator(rng).standard_normal(n)


def sample_chi_square_sum(n: int, rng) -> float:
    """Sum of squares of ``n`` fresh standard Gaussians."""
    g = sample_gaussians(n, rng)
    return float(g @ g)


def _complex_gaussians(gen: np.random.Generator, shape) -> np.ndarray:
    # unit variance per complex entry
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)


def sample_haar_unit_vector(d: int, rng) -> np.ndarray:
    """Uniform unit vector in C^d from ``2d`` real Gaussians."""
    if d < 1:
        raise ValueError("dimension must be positive")
    gen = as_generator(rng)
    g = gen.standard_normal(2 * d)
    z = g[:d] + 1j * g[d:]
    return z / np.linalg.norm(z)


def _phase_fixed_qr(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    # multiply column k of Q by the phase of R_kk; plain QR is not Haar
    return q * phases[..., None, :]


def sample_haar_unitary(d: int, rng) -> np.ndarray:
    """Haar unitary via Ginibre QR with the diagonal phase correction."""
    if d < 1:
        raise ValueError("dimension must be positive")
    return _phase_fixed_qr(_complex_gaussians(as_generator(rng), (d, d)))


def sample_haar_unitaries(count: int, d: int, rng) -> np.ndarray:
    """Stack of ``count`` independent Haar unitaries, shape ``(count, d, d)``."""
    return _phase_fixed_qr(_complex_gaussians(as_generator(rng), (count, d, d)))


def sample_haar_isometry(d: int, r: int, rng) -> np.ndarray:
    """The first ``r`` columns of a Haar unitary on C^d, shape ``(d, r)``."""
    if not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= d, got r={r}, d={d}")
    return _phase_fixed_qr(_complex_gaussians(as_generator(rng), (d, r)))


class HaarRestriction:
    """A Haar unitary evaluated only on the span of some given vectors.

    If ``W`` is an orthonormal basis of ``span(vectors)`` and ``U`` is Haar,
    then ``U @ W`` is distributed as the first ``r`` columns of a Haar unitary.
    Sampling those columns directly costs ``O(d r^2)`` instead of ``O(d^3)``
    and gives exactly the joint law of ``U v_1, ..., U v_n``.

    Calling the object on vectors outside the span raises ``ValueError``.
    """

    def __init__(self, vectors, rng, tol: float = 1e-9):
        vectors = np.asarray(vectors, dtype=complex)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        self.dim = vectors.shape[0]
        self.tol = tol
        q, r = np.linalg.qr(vectors)
        keep = np.abs(np.diagonal(r)) > tol * max(1.0, np.abs(r).max())
        # rank-deficient inputs: fall back to an SVD basis
        if not np.all(keep):
            u, s, _ = np.linalg.svd(vectors, full_matrices=False)
            q = u[:, s > tol * s.max()]
        self.basis = q
        self.image = sample_haar_isometry(self.dim, q.shape[1], rng)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        coeffs = self.basis.conj().T @ x
        residual = x - self.basis @ coeffs
        if np.linalg.norm(residual) > self.tol * max(1.0, np.linalg.norm(x)):
            raise ValueError("vector lies outside the span this restriction was sampled on")
        return self.image @ coeffs

