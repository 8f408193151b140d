"""Complex vector and matrix primitives shared by the rest of the package.

States and unitaries are plain ``numpy`` arrays (``complex128``). The inner
product is conjugate-linear in its *first* argument, ``<u|w> = sum(conj(u) * w)``,
and every routine here (including :func:`polarization_inner_product`) follows
that convention.

Block indices in the public API are 1-based: block ``j`` of a vector of
dimension ``d1`` is the slice ``[(j - 1) * d2, j * d2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-10
UNITARY_TOL = 1e-9
DIST_TOL = 1e-9


def l2_norm(v) -> float:
    v = np.asarray(v)
    if v.size == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(v) ** 2)))


def frobenius_norm(m) -> float:
    return l2_norm(np.asarray(m).reshape(-1))


def inner_product(u, w) -> complex:
    """Return ``<u|w>``, conjugating ``u``."""
    u = np.asarray(u)
    w = np.asarray(w)
    if u.shape != w.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {w.shape}")
    return complex(np.vdot(u, w))


def polarization_inner_product(u, w) -> complex:
    """Reconstruct ``<u|w>`` for unit vectors from two distances.

    For unit ``u, w`` and the bra-ket convention,

        Re<u|w> = 1 - |u - w|^2 / 2
        Im<u|w> = |u - i w|^2 / 2 - 1

    Works along the last axis, so stacks of vectors broadcast.
    """
    u = np.asarray(u)
    w = np.asarray(w)
    if u.shape[-1] != w.shape[-1]:
        raise ValueError(f"dimension mismatch: {u.shape} vs {w.shape}")
    d_re = np.sum(np.abs(u - w) ** 2, axis=-1)
    d_im = np.sum(np.abs(u - 1j * w) ** 2, axis=-1)
    out = (1.0 - 0.5 * d_re) + 1j * (0.5 * d_im - 1.0)
    return complex(out) if np.ndim(out) == 0 else out


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    d = u.shape[0]
    return frobenius_norm(u @ u.conj().T - np.eye(d)) <= tol * d


def check_unitary(u, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, tol):
        raise ValueError("matrix is not unitary to tolerance")
    return u


def check_state(v, normalized: bool = False, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise ValueError(f"state must be one-dimensional, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.shape[0]}")
    if normalized and abs(l2_norm(v) - 1.0) > NORM_TOL:
        raise ValueError("state is not normalized")
    return v


@dataclass(frozen=True)
class BlockStructure:
    """Partition of ``d1`` coordinates into ``d1 // d2`` contiguous blocks."""

    d1: int
    d2: int

    def __post_init__(self):
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("dimensions must be positive")
        if self.d2 >= self.d1:
            raise ValueError(f"need d2 < d1, got d2={self.d2}, d1={self.d1}")
        if self.d1 % self.d2:
            raise ValueError(f"d2={self.d2} does not divide d1={self.d1}")

    @property
    def num_blocks(self) -> int:
        return self.d1 // self.d2

    def check_block(self, j: int) -> int:
        if not 1 <= j <= self.num_blocks:
            raise IndexError(f"block index {j} outside [1, {self.num_blocks}]")
        return j

    def blocks(self, x) -> np.ndarray:
        """View ``x`` (shape ``(d1, ...)``) as ``(num_blocks, d2, ...)``."""
        x = np.asarray(x)
        if x.shape[0] != self.d1:
            raise ValueError(f"dimension mismatch: expected {self.d1}, got {x.shape[0]}")
        return x.reshape((self.num_blocks, self.d2) + x.shape[1:])


def block_project(v, j: int, bs: BlockStructure) -> np.ndarray:
    v = check_state(v, dim=bs.d1)
    bs.check_block(j)
    return v[(j - 1) * bs.d2 : j * bs.d2].copy()


def l1_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"mismatched distributions: {p.shape} vs {q.shape}")
    for name, r in (("p", p), ("q", q)):
        if np.any(r < 0) or abs(r.sum() - 1.0) > DIST_TOL:
            raise ValueError(f"{name} is not a probability vector")
    return float(np.abs(p - q).sum())


def basis_state(d: int, index: int) -> np.ndarray:
    """Computational basis vector ``e_index`` (1-based)."""
    if not 1 <= index <= d:
        raise IndexError(f"basis index {index} outside [1, {d}]")
    e = np.zeros(d, dtype=complex)
    e[index - 1] = 1.0
    return e
