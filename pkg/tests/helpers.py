"""Shared constructions for the test suite."""

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


def ketbra(psi, phi=None):
    psi = np.asarray(psi, dtype=complex)
    phi = psi if phi is None else np.asarray(phi, dtype=complex)
    return np.outer(psi, phi.conj())


def bloch_state(r1, r2, r3):
    """Qubit state from Bloch coordinates."""
    return (np.eye(2, dtype=complex) + r1 * SIGMA_X + r2 * SIGMA_Y + r3 * SIGMA_Z) / 2


def random_hermitian(d, rng, scale=1.0):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (g + g.conj().T) / 2


def random_unit_trace_hermitian(d, rng, scale=1.0):
    h = random_hermitian(d, rng, scale)
    return h + (1.0 - np.trace(h).real) / d * np.eye(d)
