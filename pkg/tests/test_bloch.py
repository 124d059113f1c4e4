import itertools

import numpy as np
import pytest
from helpers import KET0, PAULIS, bloch_state, ketbra, random_unit_trace_hermitian

from qrobust.bloch import (
    from_bloch,
    gellmann_basis,
    psd_via_s,
    s_poly,
    s_poly_all,
    shifted_operator,
    to_bloch,
)
from qrobust.errors import ValidationError
from qrobust.operators import eigvals_hermitian, is_psd, random_density


def elementary_symmetric(values, m):
    """Brute-force e_m over all size-m subsets; oracle for the Newton recursion."""
    if m == 0:
        return 1.0
    return float(sum(np.prod(combo) for combo in itertools.combinations(values, m)))


def test_gellmann_qubit_is_pauli():
    basis = gellmann_basis(2)
    assert len(basis) == 3
    for lam, pauli in zip(basis, PAULIS):
        assert np.allclose(lam, pauli)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_gellmann_orthogonality(d):
    basis = gellmann_basis(d)
    assert len(basis) == d * d - 1
    for i, a in enumerate(basis):
        assert abs(np.trace(a)) < 1e-12
        assert np.allclose(a, a.conj().T)
        for j, b in enumerate(basis):
            expected = 2.0 if i == j else 0.0
            assert abs(np.trace(a.conj().T @ b).real - expected) < 1e-10


def test_gellmann_rejects_small_dim():
    with pytest.raises(ValidationError):
        gellmann_basis(1)


def test_bloch_maximally_mixed_is_origin():
    for d in (2, 3, 4):
        assert np.allclose(to_bloch(np.eye(d) / d), 0.0)


def test_bloch_qubit_convention():
    assert np.allclose(to_bloch(ketbra(KET0)), [0.0, 0.0, 1.0])


def test_bloch_round_trip():
    rng = np.random.default_rng(17)
    for d in (2, 3, 4):
        for _ in range(10):
            rho = random_density(d, seed=int(rng.integers(1 << 30)))
            x = to_bloch(rho)
            assert np.max(np.abs(from_bloch(x) - rho)) < 1e-12
            assert np.max(np.abs(to_bloch(from_bloch(x)) - x)) < 1e-10


def test_to_bloch_requires_unit_trace():
    with pytest.raises(ValidationError):
        to_bloch(np.eye(2))


def test_s_poly_base_cases():
    h = np.diag([0.3, 0.7])
    assert s_poly(h, 0) == 1.0
    assert abs(s_poly(h, 1) - 1.0) < 1e-12
    assert abs(s_poly(np.diag([-0.5, 1.5]), 2) - (-0.75)) < 1e-12
    with pytest.raises(ValidationError):
        s_poly(h, 3)


def test_s2_matches_bloch_ball_formula():
    rng = np.random.default_rng(23)
    for _ in range(20):
        x = rng.uniform(-0.7, 0.7, size=3)
        eta = bloch_state(*x)
        assert abs(s_poly(eta, 2) - (1.0 - np.dot(x, x)) / 4.0) < 1e-12


def test_s_poly_equals_elementary_symmetric():
    rng = np.random.default_rng(31)
    for d in (2, 3, 4, 5):
        for _ in range(10):
            h = random_unit_trace_hermitian(d, rng, scale=rng.uniform(0.2, 3.0))
            eigs = eigvals_hermitian(h)
            s = s_poly_all(h)
            bound = np.max(np.abs(eigs)) + 1.0
            for m in range(d + 1):
                assert abs(s[m] - elementary_symmetric(eigs, m)) < 1e-8 * (1 + bound**m)


def test_shifted_operator_identity_case():
    rho = random_density(3, seed=5)
    assert np.allclose(shifted_operator(rho, rho, 0.7, "robustness"), rho)


def test_shifted_operator_arithmetic():
    rho = ketbra(KET0)
    eta = np.eye(2) / 2
    assert np.allclose(shifted_operator(rho, eta, 0.5, "robustness"), np.diag([-0.5, 1.5]))
    rho2 = np.diag([0.75, 0.25]).astype(complex)
    assert np.allclose(shifted_operator(rho2, eta, 0.5, "weight"), np.diag([1.0, 0.0]))


def test_shifted_operator_unit_trace():
    rng = np.random.default_rng(41)
    for mode, s in (("robustness", 0.3), ("robustness", 2.5), ("weight", 0.4)):
        rho = random_density(3, seed=int(rng.integers(1 << 30)))
        eta = random_density(3, seed=int(rng.integers(1 << 30)))
        out = shifted_operator(rho, eta, s, mode)
        assert abs(np.trace(out).real - 1.0) < 1e-10


def test_shifted_operator_rejects_bad_s():
    rho = random_density(2, seed=1)
    eta = random_density(2, seed=2)
    for mode, s in (("robustness", 0.0), ("robustness", -1.0), ("weight", 0.0), ("weight", 1.0)):
        with pytest.raises(ValidationError):
            shifted_operator(rho, eta, s, mode)


def test_psd_via_s_simple_cases():
    assert not psd_via_s(np.diag([-0.5, 1.5]))
    for d in (2, 3, 4):
        assert psd_via_s(random_density(d, seed=d))


def test_psd_via_s_agrees_with_eigen_oracle():
    rng = np.random.default_rng(59)
    for d in (2, 3, 4):
        for i in range(300):
            if i % 3 == 0:
                h = random_density(d, seed=int(rng.integers(1 << 30)))
            elif i % 3 == 1:
                h = random_unit_trace_hermitian(d, rng)
            else:
                h = random_density(d, seed=int(rng.integers(1 << 30)))
                h = h + random_unit_trace_hermitian(d, rng, scale=0.05) - np.eye(d) / d * 0.05 * 0
            assert psd_via_s(h, 1e-9) == is_psd(h, 1e-9)


def _max_ray_parameter(rho, eta, positive_side):
    """Largest u >= 1 (or most negative u <= 0) keeping rho + u(eta - rho) PSD."""
    direction = eta - rho

    def ok(u):
        return is_psd(rho + u * direction, 1e-13)

    if positive_side:
        lo, hi = 1.0, 2.0
        while ok(hi):
            lo, hi = hi, hi * 2
            if hi > 1e9:
                raise AssertionError("ray never exits the PSD cone")
        for _ in range(200):
            mid = (lo + hi) / 2
            if ok(mid):
                lo = mid
            else:
                hi = mid
        return lo
    lo, hi = -2.0, 0.0
    while ok(lo):
        lo, hi = lo * 2, lo
        if lo < -1e9:
            raise AssertionError("ray never exits the PSD cone")
    for _ in range(200):
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def test_robustness_decomposability_matches_ray_oracle():
    # eta = (rho + s' tau)/(1 + s') is possible with s' <= s exactly when the
    # shifted operator passes the S_m test; the critical s' comes from the
    # PSD exit point of the ray through rho and eta.
    rng = np.random.default_rng(101)
    for d in (2, 3):
        for _ in range(8):
            rho = random_density(d, seed=int(rng.integers(1 << 30)))
            eta = random_density(d, seed=int(rng.integers(1 << 30)))
            u_max = _max_ray_parameter(rho, eta, positive_side=True)
            q_star = 1.0 / (u_max - 1.0)
            assert psd_via_s(shifted_operator(rho, eta, q_star * 1.02, "robustness"), 1e-11)
            assert not psd_via_s(shifted_operator(rho, eta, q_star * 0.98, "robustness"), 1e-11)


def test_weight_decomposability_matches_ray_oracle():
    rng = np.random.default_rng(103)
    for d in (2, 3):
        for _ in range(8):
            rho = random_density(d, seed=int(rng.integers(1 << 30)))
            eta = random_density(d, seed=int(rng.integers(1 << 30)))
            u_min = _max_ray_parameter(rho, eta, positive_side=False)
            q_star = 1.0 / (1.0 - u_min)
            assert psd_via_s(shifted_operator(rho, eta, min(q_star * 1.02, 0.999), "weight"), 1e-11)
            assert not psd_via_s(shifted_operator(rho, eta, q_star * 0.98, "weight"), 1e-11)


def test_mixing_construction_passes_shift_test():
    # eta built as (rho + s' tau)/(1 + s') with s' <= s must pass at s.
    rng = np.random.default_rng(107)
    for _ in range(10):
        rho = random_density(3, seed=int(rng.integers(1 << 30)))
        tau = random_density(3, seed=int(rng.integers(1 << 30)))
        s = rng.uniform(0.2, 2.0)
        s_prime = s * rng.uniform(0.3, 1.0)
        eta = (rho + s_prime * tau) / (1.0 + s_prime)
        assert psd_via_s(shifted_operator(rho, eta, s, "robustness"), 1e-10)
