"""Scikit-learn compatible wrapper around the JL transforms."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_complex_array, check_stream, is_power_of_two
from .circuits import apply_circuit, generate_local_random_circuit
from .linalg import BlockStructure
from .sampling import sample_haar_unitary


class JLProjector(TransformerMixin, BaseEstimator):
    """Random unitary followed by a block projection.

    ``fit`` draws the unitary (dense Haar, or a local random circuit when
    ``unitary="circuit"``); ``transform`` maps each row ``x`` to
    ``sqrt(d1/d2) * Pi_block U x``. The quantum variant, where the block is
    measured instead of chosen, is exposed through :meth:`measure`.

    Parameters
    ----------
    n_components : int
        Block dimension ``d2``. Must divide the number of features.
    unitary : {"haar", "circuit"}
        Where ``U`` comes from. Circuits need a power-of-two feature count.
    circuit_size : int or None
        Number of gates when ``unitary="circuit"``. Defaults to ``4 * q**2``.
    block : int
        1-based block kept by :meth:`transform`.
    random_state : int, RngStream or None
    """

    def __init__(self, n_components=64, unitary="haar", circuit_size=None, block=1, random_state=None):
        self.n_components = n_components
        self.unitary = unitary
        self.circuit_size = circuit_size
        self.block = block
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_complex_array(X)
        d1 = X.shape[1]
        bs = BlockStructure(d1, int(self.n_components))
        if not 1 <= self.block <= bs.num_blocks:
            raise ValueError(f"block must lie in [1, {bs.num_blocks}], got {self.block}")
        stream = check_stream(self.random_state)
        if self.unitary == "haar":
            self.unitary_ = sample_haar_unitary(d1, stream)
            self.circuit_ = None
        elif self.unitary == "circuit":
            if not is_power_of_two(d1):
                raise ValueError(f"circuits need a power-of-two dimension, got {d1}")
            q = d1.bit_length() - 1
            size = 4 * q * q if self.circuit_size is None else int(self.circuit_size)
            self.circuit_ = generate_local_random_circuit(q, size, stream)
            self.unitary_ = None
        else:
            raise ValueError(f"unitary must be 'haar' or 'circuit', got {self.unitary!r}")
        self.block_structure_ = bs
        self.n_features_in_ = d1
        return self

    def _rotate(self, X):
        check_is_fitted(self, "block_structure_")
        X = check_complex_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, but JLProjector was fitted with {self.n_features_in_}")
        if self.circuit_ is not None:
            return apply_circuit(self.circuit_, X.T).T
        return X @ self.unitary_.T

    def transform(self, X):
        Y = self._rotate(X)
        bs = self.block_structure_
        lo = (self.block - 1) * bs.d2
        return np.sqrt(bs.d1 / bs.d2) * Y[:, lo : lo + bs.d2]

    def block_probabilities(self, X):
        """Born probabilities of each block name for each (normalized) row."""
        Y = self._rotate(X)
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise ValueError("rows must be nonzero")
        Y = Y / norms
        bs = self.block_structure_
        return np.sum(np.abs(Y.reshape(len(Y), bs.num_blocks, bs.d2)) ** 2, axis=2)

    def measure(self, X, random_state=None):
        """Measure a block name per row.

        Returns ``(blocks, states)``: 1-based block names and the normalized
        collapsed states, shape ``(n_samples, d2)``.
        """
        Y = self._rotate(X)
        Y = Y / np.linalg.norm(Y, axis=1, keepdims=True)
        bs = self.block_structure_
        blocks = Y.reshape(len(Y), bs.num_blocks, bs.d2)
        probs = np.sum(np.abs(blocks) ** 2, axis=2)
        gen = check_stream(random_state).generator()
        names = np.array([gen.choice(bs.num_blocks, p=p / p.sum()) for p in probs])
        picked = blocks[np.arange(len(Y)), names]
        return names + 1, picked / np.linalg.norm(picked, axis=1, keepdims=True)
