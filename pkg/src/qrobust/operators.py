"""Dense complex-matrix substrate: validation, eigenvalues, norms, tensors.

Every other module routes its linear algebra through here.  Operators are
plain ``numpy.ndarray`` values; the ``require_*`` helpers enforce the type
invariants (Hermiticity, unit trace, positivity) and return a cleaned-up
copy, so downstream math always sees exactly Hermitian data.
"""

from __future__ import annotations

import numpy as np

from .errors import ResourceCapError, ValidationError
from .kernels import jacobi_eigh

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
DENSITY_PSD_TOL = 1e-10
TENSOR_DIM_CAP = 4096


def as_matrix(x) -> np.ndarray:
    """Coerce to a finite complex matrix (no shape constraints)."""
    m = np.asarray(x, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"expected a matrix, got array of ndim {m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValidationError("matrix has non-finite entries")
    return m


def require_hermitian(h, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate Hermiticity within ``tol`` and return the symmetrized matrix."""
    m = as_matrix(h)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"Hermitian operator must be square, got {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian: max |H - H^dag| = {dev:.3e} > {tol:.1e}")
    return (m + m.conj().T) / 2


def require_density(rho, trace_tol: float = TRACE_TOL, psd_tol: float = DENSITY_PSD_TOL) -> np.ndarray:
    """Validate a density operator: Hermitian, unit trace, PSD within tolerance."""
    m = require_hermitian(rho)
    tr = np.trace(m).real
    if abs(tr - 1.0) > trace_tol:
        raise ValidationError(f"density operator must have unit trace, got {tr!r}")
    low = eigvals_hermitian(m)[0]
    if low < -psd_tol:
        raise ValidationError(f"density operator has negative eigenvalue {low:.3e}")
    return m


def eigvals_hermitian(h, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix (cyclic Jacobi)."""
    m = require_hermitian(h, tol=tol)
    w, _ = jacobi_eigh(m, compute_vectors=False)
    return w


def eigh_hermitian(h, tol: float = HERMITICITY_TOL):
    """Ascending eigenvalues and eigenvector columns of a Hermitian matrix."""
    m = require_hermitian(h, tol=tol)
    return jacobi_eigh(m, compute_vectors=True)


def reconstruction_residual(h, w, v) -> float:
    """Max-entry residual ``|H - V diag(w) V^dag|`` of an eigendecomposition."""
    m = as_matrix(h)
    return float(np.max(np.abs(m - (v * w) @ v.conj().T)))


def is_psd(h, tol: float = 1e-9) -> bool:
    """True iff the minimum eigenvalue of ``h`` is at least ``-tol``."""
    if tol < 0:
        raise ValidationError("tolerance must be nonnegative")
    return bool(eigvals_hermitian(h)[0] >= -tol)


def trace_norm(x) -> float:
    """Sum of singular values, computed from the spectrum of X^dag X."""
    m = as_matrix(x)
    gram = m.conj().T @ m
    w, _ = jacobi_eigh((gram + gram.conj().T) / 2, compute_vectors=False)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def operator_norm(x) -> float:
    """Largest singular value; for Hermitian input this is max |eigenvalue|."""
    m = as_matrix(x)
    gram = m.conj().T @ m
    w, _ = jacobi_eigh((gram + gram.conj().T) / 2, compute_vectors=False)
    return float(np.sqrt(max(w[-1], 0.0)))


def kron(a, b, cap: int = TENSOR_DIM_CAP) -> np.ndarray:
    """Kronecker product with a result-dimension cap."""
    ma, mb = as_matrix(a), as_matrix(b)
    rows = ma.shape[0] * mb.shape[0]
    cols = ma.shape[1] * mb.shape[1]
    if max(rows, cols) > cap:
        raise ResourceCapError(
            f"Kronecker product of dimension {rows}x{cols} exceeds the tensor cap {cap}"
        )
    return np.kron(ma, mb)


def kron_all(mats, cap: int = TENSOR_DIM_CAP) -> np.ndarray:
    """Kronecker product of a nonempty sequence, left to right."""
    mats = list(mats)
    if not mats:
        raise ValidationError("kron_all needs at least one factor")
    out = as_matrix(mats[0])
    for m in mats[1:]:
        out = kron(out, m, cap=cap)
    return out


def kron_power(a, m: int, cap: int = TENSOR_DIM_CAP) -> np.ndarray:
    """m-fold tensor power of a matrix."""
    if m < 1:
        raise ValidationError(f"tensor power needs m >= 1, got {m}")
    mat = as_matrix(a)
    if mat.shape[0] ** m > cap or mat.shape[1] ** m > cap:
        raise ResourceCapError(
            f"tensor power dimension {mat.shape[0]}^{m} exceeds the tensor cap {cap}"
        )
    out = mat
    for _ in range(m - 1):
        out = np.kron(out, mat)
    return out


def partial_trace(x, d1: int, d2: int, side: str = "second") -> np.ndarray:
    """Trace out one tensor factor of an operator on a d1*d2 space.

    ``side="second"`` returns the reduced operator on the first factor,
    ``side="first"`` on the second.
    """
    m = as_matrix(x)
    if m.shape != (d1 * d2, d1 * d2):
        raise ValidationError(f"operator shape {m.shape} does not match d1*d2 = {d1 * d2}")
    t = m.reshape(d1, d2, d1, d2)
    if side == "second":
        return np.einsum("ijkj->ik", t)
    if side == "first":
        return np.einsum("ijil->jl", t)
    raise ValidationError(f"side must be 'first' or 'second', got {side!r}")


def random_density(d: int, seed: int) -> np.ndarray:
    """Hilbert-Schmidt random state: rho = G G^dag / tr for Ginibre G."""
    if d < 2:
        raise ValidationError(f"dimension must be at least 2, got {d}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_density_stream(d: int, n: int, seed: int) -> list[np.ndarray]:
    """n independent Hilbert-Schmidt random states from one seeded stream."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        rho = g @ g.conj().T
        out.append(rho / np.trace(rho).real)
    return out


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state as a rank-one projector."""
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())
