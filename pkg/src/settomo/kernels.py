"""Backend selection for the measurement-map kernel.

Two implementations of the same contraction are shipped:

* ``python``: chunked numpy, which routes the contraction through BLAS;
* ``cython``: a compiled fixed-order loop (built at install time).

Both evaluate ``s_p = sum_ij W_ij exp(i k_i q1_p) exp(i k'_j q2_p)`` and agree
to floating-point roundoff.  On BLAS-backed numpy installs the python backend
benchmarks faster (see ``benchmarks/bench_kernels.py``), so it is the default;
set ``SETTOMO_KERNEL_BACKEND=cython`` before import to use the compiled loop
on platforms where BLAS is weak or unavailable.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_requested = os.environ.get("SETTOMO_KERNEL_BACKEND", "python")
if _requested == "cython" and _compiled is not None:
    _active = _compiled
else:
    _active = _kernels_py

BACKEND = _active.BACKEND
map_points = _active.map_points


def available_backends() -> dict[str, object]:
    """Importable backends keyed by name (for tests and benchmarks)."""
    backends: dict[str, object] = {"python": _kernels_py}
    if _compiled is not None:
        backends["cython"] = _compiled
    return backends
