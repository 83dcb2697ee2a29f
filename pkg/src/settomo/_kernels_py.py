"""Pure numpy implementation of the measurement-map kernel.

Evaluates s_p = sum_ij W_ij exp(i k_i q1_p) exp(i k'_j q2_p) for batches of
phase points.  Work is chunked so temporaries stay bounded regardless of the
number of points.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_CHUNK = 2048


def map_points(
    w: np.ndarray,
    ks: np.ndarray,
    ki: np.ndarray,
    q1: np.ndarray,
    q2: np.ndarray,
) -> np.ndarray:
    w = np.ascontiguousarray(w, dtype=np.complex128)
    ks = np.asarray(ks, dtype=float)
    ki = np.asarray(ki, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q1.shape != q2.shape:
        raise ValueError("q1 and q2 must have the same length")
    if w.shape != (len(ks), len(ki)):
        raise ValueError("kernel shape does not match coordinate arrays")
    n = len(q1)
    out = np.empty(n, dtype=np.complex128)
    wt = w.T.copy()
    for a in range(0, n, _CHUNK):
        b = min(a + _CHUNK, n)
        v = np.exp(1j * np.outer(q2[a:b], ki))
        u = np.exp(1j * np.outer(q1[a:b], ks))
        out[a:b] = np.einsum("pi,pi->p", u, v @ wt)
    return out
