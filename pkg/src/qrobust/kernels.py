"""Backend selection for the hot eigensolver kernel.

The compiled Cython extension is preferred; the pure-Python module is a
drop-in replacement running the same deterministic sweep.  Set
``QROBUST_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
by CI environments without a compiler).
"""

from __future__ import annotations

import os

if os.environ.get("QROBUST_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND


def jacobi_eigh(matrix, compute_vectors=True, tol=1e-14, max_sweeps=100):
    """Eigenvalues (ascending) and optional eigenvectors of a Hermitian matrix."""
    return _impl.jacobi_eigh(matrix, compute_vectors=compute_vectors, tol=tol, max_sweeps=max_sweeps)
