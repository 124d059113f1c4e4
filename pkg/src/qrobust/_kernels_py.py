"""Pure-Python cyclic Jacobi eigensolver for complex Hermitian matrices.

Reference implementation of the compiled kernel in ``_kernels.pyx``.  Both
backends run the identical row-cyclic sweep so that results agree to
rounding; this module is selected at import time when the extension is
unavailable or ``QROBUST_PURE_PYTHON=1`` is set.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def jacobi_eigh(matrix, compute_vectors=True, tol=1e-14, max_sweeps=100):
    """Diagonalize a Hermitian matrix with row-cyclic Jacobi rotations.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and unitary ``v``
    whose columns are the matching eigenvectors (``v`` is None when
    ``compute_vectors`` is False).  The sweep order is fixed, so repeated
    calls on the same input give bit-identical output.
    """
    a = np.array(matrix, dtype=np.complex128, order="C")
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("jacobi_eigh expects a square matrix")
    v = np.eye(n, dtype=np.complex128) if compute_vectors else None
    if n == 1:
        return np.array([a[0, 0].real]), v

    scale = math.sqrt(sum(abs(a[i, j]) ** 2 for i in range(n) for j in range(n)))
    if scale == 0.0:
        return np.zeros(n), v

    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(a[p, q]) ** 2
        if math.sqrt(off) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = abs(apq)
                if g < 1e-300:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                alpha = a[p, p].real
                beta = a[q, q].real
                tau = (beta - alpha) / (2.0 * g)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                w = (t * c) * (apq / g)

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - np.conj(w) * col_q
                a[:, q] = w * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - w * row_q
                a[q, :] = np.conj(w) * row_p + c * row_q

                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real

                if compute_vectors:
                    vcol_p = v[:, p].copy()
                    vcol_q = v[:, q].copy()
                    v[:, p] = c * vcol_p - np.conj(w) * vcol_q
                    v[:, q] = w * vcol_p + c * vcol_q

    eigvals = np.real(np.diag(a)).copy()
    order = np.argsort(eigvals, kind="stable")
    eigvals = eigvals[order]
    if compute_vectors:
        v = v[:, order]
    return eigvals, v
