"""Prefix sums for sorted samples.

Long samples are accumulated with Neumaier's compensated summation so that
the trimmed means of the ECF do not drift at Monte Carlo scale.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Below this length plain ``np.cumsum`` is exact enough.
COMPENSATED_THRESHOLD = 100_000


@njit(cache=True)
def _neumaier_cumsum(x: np.ndarray) -> np.ndarray:  # pragma: no cover - jitted
    out = np.empty(x.shape[0] + 1, dtype=np.float64)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    for i in range(x.shape[0]):
        v = x[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i + 1] = s + c
    return out


def prefix_sums(values: np.ndarray) -> np.ndarray:
    """Return ``out`` of length ``len(values) + 1`` with ``out[k] = sum(values[:k])``."""
    x = np.ascontiguousarray(values, dtype=np.float64)
    if x.shape[0] >= COMPENSATED_THRESHOLD:
        return _neumaier_cumsum(x)
    out = np.empty(x.shape[0] + 1, dtype=np.float64)
    out[0] = 0.0
    np.cumsum(x, out=out[1:])
    return out
