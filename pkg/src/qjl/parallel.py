"""Fan trials out over worker processes without changing results.

Trial ``i`` always draws from ``RngStream(master_seed, i)`` and results are
reassembled in trial order, so output depends only on the seed.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

from .sampling import RngStream


def _run_chunk(fn: Callable, master_seed: int, start: int, stop: int) -> np.ndarray:
    return np.asarray([fn(RngStream(master_seed, i)) for i in range(start, stop)], dtype=float)


def map_trials(fn: Callable[[RngStream], float], trials: int, master_seed: int, workers: int = 1,
               chunk: int = 1000) -> np.ndarray:
    """Evaluate ``fn`` on streams ``0..trials-1`` and return the values in order.

    ``fn`` may return a float or a fixed-length sequence (giving a 2-D result).

    ``fn`` must be picklable (a module-level function or ``functools.partial``)
    when ``workers > 1``.
    """
    bounds = [(a, min(a + chunk, trials)) for a in range(0, trials, chunk)]
    if workers <= 1 or len(bounds) == 1:
        parts = [_run_chunk(fn, master_seed, a, b) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, fn, master_seed, a, b) for a, b in bounds]
            parts = [f.result() for f in futures]
    return np.concatenate(parts) if parts else np.zeros(0)
