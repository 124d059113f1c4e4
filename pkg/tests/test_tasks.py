import numpy as np
import pytest
from helpers import KET0, KET1, bloch_state, ketbra

from qrobust.errors import ValidationError
from qrobust.freesets import ConvexFreeSet, FreeSetUnion, qubit_axis_union
from qrobust.operators import kron_power, random_density, trace_norm
from qrobust.tasks import (
    Channel,
    ChannelEnsemble,
    POVM,
    discrimination_advantage,
    exclusion_advantage,
    helstrom,
    measure_prepare_channel,
    p_err,
    p_succ,
    task_observable,
    witness_channels,
    worst_case_discrimination,
    worst_case_exclusion,
)
from qrobust.witness import build_family, shift_family

MIXED = FreeSetUnion([ConvexFreeSet.singleton(np.eye(2) / 2, label="mixed")])
Z_ONLY = FreeSetUnion([ConvexFreeSet.incoherent_basis(np.eye(2), label="z")])
DEMO_STATE = bloch_state(0.3, 0.4, 0.5)


def random_povm(d, n, rng):
    gs = []
    for _ in range(n):
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        gs.append(a @ a.conj().T)
    total = sum(gs)
    w, v = np.linalg.eigh(total)
    root = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    return POVM([root @ g @ root for g in gs])


def prepare_channel(state):
    """Channel mapping everything to a fixed pure state."""
    psi = np.asarray(state, dtype=complex)
    return Channel([np.outer(psi, e.conj()) for e in np.eye(len(psi))])


def test_channel_validation():
    with pytest.raises(ValidationError):
        Channel([np.array([[1.0, 0.0], [0.0, 0.5]])])
    chan = Channel([np.eye(2)])
    assert np.allclose(chan.apply(ketbra(KET0)), ketbra(KET0))


def test_povm_validation():
    with pytest.raises(ValidationError):
        POVM([np.eye(2), np.eye(2)])
    with pytest.raises(ValidationError):
        POVM([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])])


def test_p_succ_identical_channels_half():
    chan = Channel([np.eye(2)])
    ens = ChannelEnsemble(np.array([0.5, 0.5]), [chan, chan])
    rng = np.random.default_rng(0)
    povm = random_povm(2, 2, rng)
    rho = random_density(2, seed=4)
    assert abs(p_succ(ens, povm, rho) - 0.5) < 1e-10


def test_p_succ_orthogonal_preparations():
    ens = ChannelEnsemble(np.array([0.5, 0.5]), [prepare_channel(KET0), prepare_channel(KET1)])
    povm = POVM([ketbra(KET0), ketbra(KET1)])
    assert abs(p_succ(ens, povm, random_density(2, seed=1)) - 1.0) < 1e-10
    # anti-aligned outcome labels give zero exclusion error
    swapped = POVM([ketbra(KET1), ketbra(KET0)])
    assert abs(p_err(ens, swapped, random_density(2, seed=2)) - 0.0) < 1e-10


def test_p_err_complementarity_two_outcomes():
    rng = np.random.default_rng(5)
    ens = ChannelEnsemble(np.array([0.3, 0.7]), [prepare_channel(KET0), prepare_channel((KET0 + KET1) / np.sqrt(2))])
    povm = random_povm(2, 2, rng)
    rho = random_density(2, seed=8)
    swapped = POVM([povm.effects[1], povm.effects[0]])
    assert abs(p_err(ens, swapped, rho) - (1.0 - p_succ(ens, povm, rho))) < 1e-10


def test_p_succ_matches_brute_force():
    rng = np.random.default_rng(9)
    for _ in range(5):
        n = int(rng.integers(2, 4))
        chans = []
        for _ in range(n):
            g = rng.standard_normal((2 * 3, 3)) + 1j * rng.standard_normal((2 * 3, 3))
            q, _ = np.linalg.qr(g)
            chans.append(Channel([q[:3, :], q[3:, :]]))
        ens = ChannelEnsemble(rng.dirichlet(np.ones(n)), chans)
        povm = random_povm(3, n, rng)
        rho = random_density(3, seed=int(rng.integers(1 << 30)))
        brute = sum(
            p * np.trace(m @ chan.apply(rho)).real
            for p, chan, m in zip(ens.probabilities, ens.channels, povm.effects)
        )
        assert abs(p_succ(ens, povm, rho) - brute) < 1e-10


def test_outcome_count_mismatch():
    ens = ChannelEnsemble(np.array([1.0]), [Channel([np.eye(2)])])
    povm = POVM([np.eye(2) / 2, np.eye(2) / 2])
    with pytest.raises(ValidationError):
        p_succ(ens, povm, np.eye(2) / 2)


def test_helstrom_basics():
    _, val = helstrom(np.eye(2) / 2, np.eye(2) / 2)
    assert abs(val - 0.5) < 1e-12
    _, val = helstrom(ketbra(KET0), ketbra(KET1))
    assert abs(val - 1.0) < 1e-12


def test_helstrom_value_formula_and_povm():
    rng = np.random.default_rng(11)
    for _ in range(10):
        r1 = random_density(3, seed=int(rng.integers(1 << 30)))
        r2 = random_density(3, seed=int(rng.integers(1 << 30)))
        q = rng.uniform(0.2, 0.8)
        povm, val = helstrom(r1, r2, (q, 1 - q))
        expected = 0.5 * (1 + trace_norm(q * r1 - (1 - q) * r2))
        assert abs(val - expected) < 1e-10
        achieved = q * np.trace(povm.effects[0] @ r1).real + (1 - q) * np.trace(povm.effects[1] @ r2).real
        assert abs(achieved - val) < 1e-10


def test_helstrom_beats_random_povms():
    rng = np.random.default_rng(13)
    r1 = random_density(2, seed=3)
    r2 = random_density(2, seed=14)
    _, best = helstrom(r1, r2)
    for _ in range(1000):
        povm = random_povm(2, 2, rng)
        val = 0.5 * np.trace(povm.effects[0] @ r1).real + 0.5 * np.trace(povm.effects[1] @ r2).real
        assert val <= best + 1e-10


def test_witness_channels_trace_norm_identity():
    fam = shift_family(build_family(DEMO_STATE, 0.45), qubit_axis_union("xyz"))
    w = fam.members[2]
    lam1, lam2 = witness_channels(w)
    from qrobust.operators import operator_norm

    norm = operator_norm(w)
    rng = np.random.default_rng(17)
    for _ in range(20):
        eta = random_density(2, seed=int(rng.integers(1 << 30)))
        power = kron_power(eta, 2)
        for lam in (lam1, lam2):
            out = lam.apply(power)
            assert abs(np.trace(out).real - 1.0) < 1e-9
            assert np.linalg.eigvalsh(out)[0] > -1e-10
        diff = trace_norm(lam1.apply(power) - lam2.apply(power))
        expected = 2 * abs(np.trace(w @ power).real) / norm
        assert abs(diff - expected) < 1e-9


def test_witness_channels_constant_witness():
    lam1, lam2 = witness_channels(np.eye(4))
    rho = random_density(4, seed=5)
    out1 = lam1.apply(rho)
    out2 = lam2.apply(rho)
    assert np.allclose(out1, np.diag([1.0, 0.0]))
    assert np.allclose(out2, np.diag([0.0, 1.0]))


def test_discrimination_advantage_pure_state():
    rep = discrimination_advantage(ketbra(KET0), MIXED, tol=1e-7)
    assert rep.ratio_bound > 1 + 1e-4
    assert abs(rep.s - 0.9) < 1e-9


def test_discrimination_advantage_three_axis_demo():
    rep = discrimination_advantage(DEMO_STATE, qubit_axis_union("xyz"), tol=1e-7)
    assert rep.ratio_bound > 1 + 1e-4
    assert rep.measure_value == pytest.approx(0.5, abs=1e-6)


def test_discrimination_advantage_rejects_free_state():
    with pytest.raises(ValidationError):
        discrimination_advantage(np.eye(2) / 2, MIXED)


def test_exclusion_advantage():
    rho = np.array([[0.75, 0.2], [0.2, 0.25]], dtype=complex)
    rep = exclusion_advantage(rho, Z_ONLY, tol=1e-7)
    assert 0.0 <= rep.ratio_bound < 1.0
    with pytest.raises(ValidationError):
        exclusion_advantage(np.diag([0.4, 0.6]).astype(complex), Z_ONLY)


def test_worst_case_discrimination_singleton():
    rep = worst_case_discrimination(ketbra(KET0), MIXED, trials=300, seed=5)
    assert rep.achieved == pytest.approx(2.0, abs=1e-9)
    assert rep.bound_violations == 0
    assert rep.expected_ratio == pytest.approx(2.0, abs=1e-6)


def test_worst_case_discrimination_free_state():
    rep = worst_case_discrimination(np.eye(2) / 2, MIXED, trials=50, seed=6)
    assert rep.achieved == pytest.approx(1.0, abs=1e-9)


def test_worst_case_discrimination_three_axis_bounds():
    rep = worst_case_discrimination(DEMO_STATE, qubit_axis_union("xyz"), trials=300, seed=8)
    assert rep.bound_violations == 0
    assert rep.union_value == pytest.approx(0.5, abs=1e-6)


def test_worst_case_exclusion_singleton():
    rho = np.diag([0.75, 0.25]).astype(complex)
    rep = worst_case_exclusion(rho, MIXED, trials=300, seed=9)
    assert rep.achieved == pytest.approx(0.5, abs=1e-9)
    assert rep.bound_violations == 0
    assert rep.expected_ratio == pytest.approx(0.5, abs=1e-6)
    assert all(row["achieved_ratio"] >= 0 for row in rep.per_subset)


def test_worst_case_exclusion_free_state():
    rep = worst_case_exclusion(np.eye(2) / 2, MIXED, trials=50, seed=10)
    assert rep.achieved == pytest.approx(1.0, abs=1e-9)
    assert rep.expected_ratio == pytest.approx(1.0, abs=1e-7)


def test_task_observable_matches_definition():
    rng = np.random.default_rng(23)
    ens = ChannelEnsemble(np.array([0.4, 0.6]), [prepare_channel(KET0), prepare_channel(KET1)])
    povm = random_povm(2, 2, rng)
    obs = task_observable(ens, povm)
    rho = random_density(2, seed=55)
    direct = sum(
        p * np.trace(m @ chan.apply(rho)).real
        for p, chan, m in zip(ens.probabilities, ens.channels, povm.effects)
    )
    assert abs(np.trace(obs @ rho).real - direct) < 1e-12


def test_measure_prepare_channel_is_tp():
    effects = [np.diag([0.7, 0.1]).astype(complex), np.diag([0.3, 0.9]).astype(complex)]
    preps = [ketbra(KET0), ketbra(KET1)]
    chan = measure_prepare_channel(effects, preps)
    rho = random_density(2, seed=66)
    out = chan.apply(rho)
    want = np.trace(effects[0] @ rho) * preps[0] + np.trace(effects[1] @ rho) * preps[1]
    assert np.max(np.abs(out - want)) < 1e-12
