"""Generalized Bloch coordinates, Gell-Mann bases, and positivity polynomials.

The S_m values computed here are the elementary symmetric polynomials of the
eigenvalues, obtained from traces of matrix powers by the Newton recursion.
A Hermitian operator is PSD exactly when S_1, ..., S_d are all nonnegative,
which gives an eigensolver-free positivity test that the rest of the package
is built on.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .operators import TRACE_TOL, as_matrix, eigvals_hermitian, require_density, require_hermitian

S_SIGN_TOL = 1e-9

_BASIS_CACHE: dict[int, tuple[np.ndarray, ...]] = {}


def gellmann_basis(d: int) -> tuple[np.ndarray, ...]:
    """The d^2 - 1 generalized Gell-Mann matrices for dimension d.

    Ordering is fixed: symmetric pair operators for i < j in lexicographic
    order, then the antisymmetric pairs in the same order, then the diagonal
    operators.  For d = 2 this is exactly (sigma_x, sigma_y, sigma_z).
    Results are cached per dimension and returned read-only.
    """
    if d < 2:
        raise ValidationError(f"Gell-Mann basis needs dimension >= 2, got {d}")
    if d in _BASIS_CACHE:
        return _BASIS_CACHE[d]
    ops = []
    for i in range(d):
        for j in range(i + 1, d):
            sym = np.zeros((d, d), dtype=np.complex128)
            sym[i, j] = 1.0
            sym[j, i] = 1.0
            ops.append(sym)
    for i in range(d):
        for j in range(i + 1, d):
            asym = np.zeros((d, d), dtype=np.complex128)
            asym[i, j] = -1.0j
            asym[j, i] = 1.0j
            ops.append(asym)
    for l in range(1, d):
        diag = np.zeros((d, d), dtype=np.complex128)
        for k in range(l):
            diag[k, k] = 1.0
        diag[l, l] = -l
        ops.append(diag * math.sqrt(2.0 / (l * (l + 1))))
    for op in ops:
        op.flags.writeable = False
    basis = tuple(ops)
    _BASIS_CACHE[d] = basis
    return basis


def to_bloch(eta, trace_tol: float = TRACE_TOL) -> np.ndarray:
    """Generalized Bloch coordinates of a unit-trace Hermitian operator."""
    m = require_hermitian(eta)
    d = m.shape[0]
    tr = np.trace(m).real
    if abs(tr - 1.0) > trace_tol:
        raise ValidationError(f"Bloch coordinates need unit trace, got {tr!r}")
    scale = math.sqrt(d / (2.0 * (d - 1)))
    basis = gellmann_basis(d)
    return np.array([np.trace(m @ lam).real * scale for lam in basis])


def from_bloch(coords, d: int | None = None) -> np.ndarray:
    """Unit-trace Hermitian operator with the given Bloch coordinates.

    The output may fail to be PSD; deciding that is what the S_m test is for.
    """
    x = np.asarray(coords, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError("Bloch coordinates must be a flat real vector")
    if d is None:
        d = int(round(math.sqrt(x.size + 1)))
    if d * d - 1 != x.size:
        raise ValidationError(f"{x.size} coordinates do not fit any dimension d (need d^2 - 1)")
    basis = gellmann_basis(d)
    acc = np.eye(d, dtype=np.complex128)
    weight = math.sqrt(d * (d - 1) / 2.0)
    for xj, lam in zip(x, basis):
        acc = acc + weight * xj * lam
    return acc / d


def s_poly_all(h) -> np.ndarray:
    """S_0, ..., S_d of a Hermitian operator via the Newton recursion.

    S_m equals the m-th elementary symmetric polynomial of the eigenvalues,
    i.e. the m-th characteristic-polynomial coefficient, for any trace.
    """
    m = require_hermitian(h)
    d = m.shape[0]
    power_traces = np.empty(d + 1)
    power = np.eye(d, dtype=np.complex128)
    for l in range(1, d + 1):
        power = power @ m
        power_traces[l] = np.trace(power).real
    s = np.empty(d + 1)
    s[0] = 1.0
    for k in range(1, d + 1):
        acc = 0.0
        for l in range(1, k + 1):
            acc += (-1.0) ** (l - 1) * power_traces[l] * s[k - l]
        s[k] = acc / k
    return s


def s_poly(h, m: int) -> float:
    """The single value S_m; m must lie in 0..dim(h)."""
    mat = as_matrix(h)
    if not 0 <= m <= mat.shape[0]:
        raise ValidationError(f"S_m index m={m} out of range 0..{mat.shape[0]}")
    return float(s_poly_all(mat)[m])


def shifted_operator(rho, eta, s: float, mode: str = "robustness") -> np.ndarray:
    """The unit-trace Hermitian operator whose positivity encodes decomposability.

    robustness mode: ((1+s) eta - rho) / s, PSD iff eta = (rho + s' tau)/(1+s')
    for some s' <= s and state tau.  weight mode: (rho - (1-s) eta) / s, PSD
    iff eta = (rho - s' tau)/(1-s') for some s' <= s.
    """
    r = require_density(rho)
    e = require_density(eta)
    if r.shape != e.shape:
        raise ValidationError("states must share a dimension")
    if mode == "robustness":
        if not s > 0:
            raise ValidationError(f"robustness mode needs s > 0, got {s}")
        return ((1.0 + s) * e - r) / s
    if mode == "weight":
        if not 0 < s < 1:
            raise ValidationError(f"weight mode needs 0 < s < 1, got {s}")
        return (r - (1.0 - s) * e) / s
    raise ValidationError(f"mode must be 'robustness' or 'weight', got {mode!r}")


def psd_via_s(h, tol: float = S_SIGN_TOL) -> bool:
    """Positivity test from the S_m signs alone (no eigensolve)."""
    s = s_poly_all(h)
    return bool(np.all(s[1:] >= -tol))


def psd_via_eigs(h, tol: float = S_SIGN_TOL) -> bool:
    """Eigenvalue-oracle counterpart of psd_via_s, for cross-checks."""
    return bool(eigvals_hermitian(h)[0] >= -tol)
