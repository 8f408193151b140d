from __future__ import annotations

import numpy as np

from .sampling import RngStream


def check_complex_array(X, ensure_2d: bool = True, name: str = "X") -> np.ndarray:
    """Like ``sklearn.utils.check_array`` but keeps complex data."""
    X = np.asarray(X)
    if X.dtype.kind not in "biufc":
        raise TypeError(f"{name} must be numeric, got dtype {X.dtype}")
    X = X.astype(complex, copy=False)
    if ensure_2d:
        if X.ndim == 1:
            raise ValueError(f"Expected 2D array for {name}, got 1D array instead. "
                             "Reshape with X.reshape(1, -1) for a single sample.")
        if X.ndim != 2:
            raise ValueError(f"{name} must be 2D, got {X.ndim}D")
    if X.shape[0] == 0:
        raise ValueError(f"{name} has no samples")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or infinity")
    return X


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def check_stream(random_state, stream_id: int = 0) -> RngStream:
    """Turn ``None``, an int seed, or an :class:`RngStream` into a stream."""
    if isinstance(random_state, RngStream):
        return random_state
    if random_state is None:
        seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
        return RngStream(seed, stream_id)
    if isinstance(random_state, (int, np.integer)):
        return RngStream(int(random_state), stream_id)
    raise TypeError(f"random_state must be None, an int or an RngStream, got {type(random_state).__name__}")
