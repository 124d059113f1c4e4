# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled cyclic Jacobi eigensolver for complex Hermitian matrices.

Mirrors ``_kernels_py.jacobi_eigh`` rotation for rotation; the Python
module documents the algorithm and serves as the import-time fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND = "compiled"


def jacobi_eigh(matrix, compute_vectors=True, double tol=1e-14, int max_sweeps=100):
    """See ``qrobust._kernels_py.jacobi_eigh``; identical contract."""
    a_arr = np.array(matrix, dtype=np.complex128, order="C")
    if a_arr.ndim != 2 or a_arr.shape[0] != a_arr.shape[1]:
        raise ValueError("jacobi_eigh expects a square matrix")
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef bint want_vectors = bool(compute_vectors)
    v_arr = np.eye(n, dtype=np.complex128) if want_vectors else None
    if n == 1:
        return np.array([a_arr[0, 0].real]), v_arr

    cdef double complex[:, ::1] a = a_arr
    cdef double complex[:, ::1] v = v_arr if want_vectors else np.empty((1, 1), dtype=np.complex128)

    cdef double scale = 0.0
    cdef Py_ssize_t i, j, p, q, sweep
    for i in range(n):
        for j in range(n):
            scale += a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
    scale = sqrt(scale)
    if scale == 0.0:
        return np.zeros(n), v_arr

    cdef double off, g, alpha, beta, tau, t, c
    cdef double complex apq, w, wc, xp, xq
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
        if sqrt(off) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = sqrt(apq.real * apq.real + apq.imag * apq.imag)
                if g < 1e-300:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                alpha = a[p, p].real
                beta = a[q, q].real
                tau = (beta - alpha) / (2.0 * g)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                w = (t * c) * (apq / g)
                wc = w.real - 1j * w.imag

                for i in range(n):
                    xp = a[i, p]
                    xq = a[i, q]
                    a[i, p] = c * xp - wc * xq
                    a[i, q] = w * xp + c * xq
                for i in range(n):
                    xp = a[p, i]
                    xq = a[q, i]
                    a[p, i] = c * xp - w * xq
                    a[q, i] = wc * xp + c * xq

                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real

                if want_vectors:
                    for i in range(n):
                        xp = v[i, p]
                        xq = v[i, q]
                        v[i, p] = c * xp - wc * xq
                        v[i, q] = w * xp + c * xq

    eigvals = np.empty(n)
    for i in range(n):
        eigvals[i] = a[i, i].real
    order = np.argsort(eigvals, kind="stable")
    eigvals = eigvals[order]
    if want_vectors:
        v_arr = v_arr[:, order]
    return eigvals, v_arr
