"""Channel discrimination and exclusion games built on the witness families.

Channels are Kraus lists; the games reduce to traces against the adjoint
image of the measurement effects, so sweeping many input states costs one
matrix trace each.  Worst-case advantage reports certify the dominance
bounds from the measure optimizers and construct the optimal singleton
tasks explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .freesets import FreeSetUnion
from .measures import _pinv_sqrt, robustness_convex, robustness_union, weight_convex, weight_union
from .operators import (
    eigh_hermitian,
    kron_power,
    operator_norm,
    require_density,
    require_hermitian,
    trace_norm,
)
from .witness import WitnessFamily, build_family, free_probe_states, shift_family


@dataclass
class Channel:
    """A channel as a Kraus list (output dim x input dim each)."""

    kraus: list[np.ndarray]

    def __post_init__(self):
        if not self.kraus:
            raise ValidationError("a channel needs at least one Kraus operator")
        self.kraus = [np.asarray(k, dtype=complex) for k in self.kraus]
        shapes = {k.shape for k in self.kraus}
        if len(shapes) != 1:
            raise ValidationError("Kraus operators must share a shape")
        comp = sum(k.conj().T @ k for k in self.kraus)
        if np.max(np.abs(comp - np.eye(self.in_dim))) > 1e-9:
            raise ValidationError("Kraus operators are not trace-preserving")

    @property
    def in_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.kraus[0].shape[0]

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return sum(k @ x @ k.conj().T for k in self.kraus)

    def apply_adjoint(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=complex)
        return sum(k.conj().T @ m @ k for k in self.kraus)


def measure_prepare_channel(effects: list[np.ndarray], preparations: list[np.ndarray]) -> Channel:
    """Channel X -> sum_i tr[E_i X] rho_i from a POVM and preparation states."""
    if len(effects) != len(preparations):
        raise ValidationError("one preparation per effect is required")
    kraus = []
    for effect, prep in zip(effects, preparations):
        w_e, v_e = eigh_hermitian(effect)
        w_p, v_p = eigh_hermitian(prep)
        for le, ve in zip(w_e, v_e.T):
            if le < 1e-14:
                continue
            for lp, vp in zip(w_p, v_p.T):
                if lp < 1e-14:
                    continue
                kraus.append(math.sqrt(le * lp) * np.outer(vp, ve.conj()))
    return Channel(kraus)


@dataclass
class ChannelEnsemble:
    """Channels sampled with fixed probabilities, all on one input space."""

    probabilities: np.ndarray
    channels: list[Channel]

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if len(self.probabilities) != len(self.channels):
            raise ValidationError("one probability per channel is required")
        if abs(self.probabilities.sum() - 1.0) > 1e-12 or np.any(self.probabilities < -1e-15):
            raise ValidationError("channel probabilities must form a distribution")
        dims = {c.in_dim for c in self.channels}
        if len(dims) != 1:
            raise ValidationError("ensemble channels must share an input dimension")

    @property
    def in_dim(self) -> int:
        return self.channels[0].in_dim


@dataclass
class POVM:
    """Measurement effects: PSD within tolerance and summing to the identity."""

    effects: list[np.ndarray]

    def __post_init__(self):
        self.effects = [require_hermitian(e, tol=1e-9) for e in self.effects]
        d = self.effects[0].shape[0]
        total = sum(self.effects)
        if np.max(np.abs(total - np.eye(d))) > 1e-9:
            raise ValidationError("POVM effects must sum to the identity")
        for e in self.effects:
            w, _ = eigh_hermitian(e)
            if w[0] < -1e-10:
                raise ValidationError(f"POVM effect has negative eigenvalue {w[0]:.3e}")


def task_observable(ensemble: ChannelEnsemble, povm: POVM) -> np.ndarray:
    """sum_i p_i Lambda_i^dag(M_i); p_succ/p_err are traces against it."""
    if len(povm.effects) != len(ensemble.channels):
        raise ValidationError("outcome count must equal channel count")
    acc = np.zeros((ensemble.in_dim, ensemble.in_dim), dtype=complex)
    for p, chan, effect in zip(ensemble.probabilities, ensemble.channels, povm.effects):
        acc = acc + p * chan.apply_adjoint(effect)
    return acc


def _game_probability(ensemble: ChannelEnsemble, povm: POVM, state) -> float:
    rho = require_density(state)
    if rho.shape[0] != ensemble.in_dim:
        raise ValidationError("input state dimension does not match the ensemble")
    value = float(np.trace(task_observable(ensemble, povm) @ rho).real)
    return float(np.clip(value, -1e-10, 1 + 1e-10))


def p_succ(ensemble: ChannelEnsemble, povm: POVM, state) -> float:
    """Discrimination success probability: outcome i names the channel that occurred."""
    return _game_probability(ensemble, povm, state)


def p_err(ensemble: ChannelEnsemble, povm: POVM, state) -> float:
    """Exclusion error probability: outcome i names a channel claimed NOT to have occurred."""
    return _game_probability(ensemble, povm, state)


def helstrom(rho1, rho2, priors=(0.5, 0.5)):
    """Optimal two-outcome discrimination of two states.

    Returns (POVM, success probability); the POVM projects onto the
    positive/nonpositive eigenspaces of q rho1 - (1-q) rho2 and achieves
    (1 + ||q rho1 - (1-q) rho2||_1) / 2.
    """
    r1 = require_density(rho1)
    r2 = require_density(rho2)
    if r1.shape != r2.shape:
        raise ValidationError("helstrom needs equal dimensions")
    q = float(priors[0])
    if not 0 <= q <= 1 or abs(q + float(priors[1]) - 1.0) > 1e-12:
        raise ValidationError("priors must be a two-outcome distribution")
    diff = q * r1 - (1 - q) * r2
    w, v = eigh_hermitian(diff)
    keep = (w > 0).astype(float)
    m1 = (v * keep) @ v.conj().T
    m1 = (m1 + m1.conj().T) / 2
    m2 = np.eye(r1.shape[0]) - m1
    value = q * np.trace(m1 @ r1).real + (1 - q) * np.trace(m2 @ r2).real
    return POVM([m1, m2]), float(value)


def witness_channels(witness: np.ndarray):
    """The two measure-and-prepare channels separating states through a witness.

    Lambda_1(X) = (tr X / 2 + tr[W X]/(2 ||W||)) |0><0|
                + (tr X / 2 - tr[W X]/(2 ||W||)) |1><1|, and Lambda_2 swaps
    the signs, so their outputs differ in trace norm by 2 |tr[W X]| / ||W||.
    """
    w = require_hermitian(witness, tol=1e-9)
    norm = operator_norm(w)
    if norm < 1e-14:
        raise ValidationError("witness operator norm vanishes")
    eye = np.eye(w.shape[0], dtype=complex)
    plus = (eye + w / norm) / 2
    minus = (eye - w / norm) / 2
    ket0 = np.zeros((2, 2), dtype=complex)
    ket0[0, 0] = 1
    ket1 = np.zeros((2, 2), dtype=complex)
    ket1[1, 1] = 1
    lam1 = measure_prepare_channel([plus, minus], [ket0, ket1])
    lam2 = measure_prepare_channel([minus, plus], [ket0, ket1])
    return lam1, lam2


def _modified_witnesses(shifted: WitnessFamily) -> dict[int, np.ndarray]:
    """W_m := I - W~_m / ||W~_m|| (nonnegative on states, > 1 on the base)."""
    out = {}
    for m, w in shifted.members.items():
        out[m] = np.eye(w.shape[0]) - w / operator_norm(w)
    return out


@dataclass
class AdvantageReport:
    """Best-measurement advantage ratios of the base state over free probes."""

    task: str
    s: float
    measure_value: float
    base_optimal: dict[int, float]
    ratio_bound: float
    worst_subset: str
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "s": self.s,
            "measure_value": None if math.isinf(self.measure_value) else self.measure_value,
            "ratio_bound": self.ratio_bound,
            "worst_subset": self.worst_subset,
            "n_free_samples": self.n_samples,
            "base_optimal": {str(m): v for m, v in sorted(self.base_optimal.items())},
        }


def _advantage_report(rho, free, kind, tol, sample_budget, seed, s, m_values):
    r = require_density(rho)
    if kind == "robustness":
        measure = robustness_union(r, free, tol)
    else:
        measure = weight_union(r, free, tol)
    if measure.value <= tol:
        raise ValidationError("the state is free (measure below tolerance); no advantage task exists")
    if s is None:
        s = 0.9 if measure.is_infinite else 0.9 * measure.value
    family = shift_family(build_family(r, s, kind, m_values=m_values), free, sample_budget, seed)
    modified = _modified_witnesses(family)
    pairs = {m: witness_channels(w) for m, w in modified.items()}

    def optimal(state, m):
        lam1, lam2 = pairs[m]
        power = kron_power(state, m)
        out1, out2 = lam1.apply(power), lam2.apply(power)
        p_star = 0.5 * (1 + 0.5 * trace_norm(out1 - out2))
        return p_star if kind == "robustness" else 1 - p_star

    base = {m: optimal(r, m) for m in modified}
    bound = None
    worst_label = ""
    count = 0
    for fs in free:
        for sample_state in free_probe_states(fs, sample_budget, seed):
            count += 1
            if kind == "robustness":
                ratio = max(base[m] / optimal(sample_state, m) for m in modified)
                if bound is None or ratio < bound:
                    bound, worst_label = ratio, fs.label
            else:
                ratio = min(base[m] / optimal(sample_state, m) for m in modified)
                if bound is None or ratio > bound:
                    bound, worst_label = ratio, fs.label
    task = "discrimination" if kind == "robustness" else "exclusion"
    return AdvantageReport(task, s, measure.value, base, float(bound), worst_label, count)


def discrimination_advantage(rho, free: FreeSetUnion, tol: float = 1e-6, sample_budget: int = 40, seed: int = 0, s: float | None = None, m_values=None) -> AdvantageReport:
    """Multicopy discrimination advantage: min over free probes of max over m.

    The reported ratio bound exceeds 1 strictly for every resource state.
    """
    return _advantage_report(rho, free, "robustness", tol, sample_budget, seed, s, m_values)


def exclusion_advantage(rho, free: FreeSetUnion, tol: float = 1e-6, sample_budget: int = 40, seed: int = 0, s: float | None = None, m_values=None) -> AdvantageReport:
    """Multicopy exclusion advantage: max over free probes of min over m error ratio (< 1)."""
    return _advantage_report(rho, free, "weight", tol, sample_budget, seed, s, m_values)


def _random_task(d: int, rng: np.random.Generator):
    """A random single-copy game: ensemble of CPTP channels plus a POVM."""
    n = int(rng.integers(2, 4))
    channels = []
    for _ in range(n):
        n_kraus = int(rng.integers(1, 4))
        g = rng.standard_normal((n_kraus * d, d)) + 1j * rng.standard_normal((n_kraus * d, d))
        q, _ = np.linalg.qr(g)
        channels.append(Channel([q[i * d:(i + 1) * d, :] for i in range(n_kraus)]))
    gs = []
    for _ in range(n):
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        gs.append(a @ a.conj().T)
    total = sum(gs)
    w, v = eigh_hermitian(total)
    root = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    povm = POVM([root @ g @ root for g in gs])
    priors = rng.dirichlet(np.ones(n))
    return ChannelEnsemble(priors, channels), povm


def _achievability_effect(rho: np.ndarray, sigma: np.ndarray, maximal: bool) -> np.ndarray | None:
    """Rank-one effect sigma^{-1/2} |v><v| sigma^{-1/2} for the extreme eigvector.

    The eigenvector is taken inside the support of sigma so that rank-deficient
    free states do not produce a null effect.
    """
    root, proj = _pinv_sqrt(sigma)
    rel = root @ rho @ root
    w, v = eigh_hermitian(rel)
    order = range(len(w) - 1, -1, -1) if maximal else range(len(w))
    vec = None
    for idx in order:
        candidate = v[:, idx]
        if np.real(candidate.conj() @ (proj @ candidate)) > 0.5:
            vec = candidate
            break
    if vec is None:
        return None
    effect = root @ np.outer(vec, vec.conj()) @ root
    norm = operator_norm(effect)
    if norm < 1e-14:
        return None
    return effect / norm


@dataclass
class WorstCaseReport:
    """Dominance-bound audit plus singleton achievability for one game type."""

    task: str
    union_value: float
    expected_ratio: float | None
    per_subset: list[dict]
    bound_violations: int
    trials: int
    seed: int

    @property
    def achieved(self) -> float | None:
        vals = [row["achieved_ratio"] for row in self.per_subset if row["achieved_ratio"] is not None]
        if not vals:
            return None
        return min(vals) if self.task == "discrimination" else max(vals)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "union_value": None if math.isinf(self.union_value) else self.union_value,
            "expected_ratio": self.expected_ratio,
            "achieved_ratio": self.achieved,
            "per_subset": self.per_subset,
            "bound_violations": self.bound_violations,
            "trials": self.trials,
            "seed": self.seed,
        }


def worst_case_discrimination(rho, free: FreeSetUnion, trials: int = 1000, seed: int = 0, tol: float = 1e-6, sample_budget: int = 16) -> WorstCaseReport:
    """Certify p_succ(rho) <= (1 + R_k) max_sigma p_succ(sigma) on random games.

    For singleton subsets the optimal game is built explicitly and achieves
    the ratio 1 + R_k; the union minimum then matches 1 + R of the union.
    """
    r = require_density(rho)
    d = r.shape[0]
    rng = np.random.default_rng(seed)
    union = robustness_union(r, free, tol)
    rows = []
    violations = 0
    tasks = [_random_task(d, rng) for _ in range(trials)]
    observables = [task_observable(ens, povm) for ens, povm in tasks]
    for fs in free:
        res = robustness_convex(r, fs, tol)
        samples = free_probe_states(fs, sample_budget, seed)
        if res.optimizer_sigma is not None:
            samples = samples + [res.optimizer_sigma]
        sample_stack = np.stack(samples)
        subset_violations = 0
        if not res.is_infinite:
            cushion = (1.0 + res.value) * (1.0 + 10 * tol)
            for obs in observables:
                p_rho = np.trace(obs @ r).real
                p_free = np.einsum("sij,ji->s", sample_stack, obs).real.max()
                if p_rho > cushion * p_free + 1e-12:
                    subset_violations += 1
        achieved = None
        if fs.kind == "singleton" and not res.is_infinite:
            effect = _achievability_effect(r, fs.generators[0], maximal=True)
            if effect is not None:
                identity = Channel([np.eye(d, dtype=complex)])
                ens = ChannelEnsemble(np.array([1.0, 0.0]), [identity, identity])
                povm = POVM([effect, np.eye(d) - effect])
                num = p_succ(ens, povm, r)
                den = p_succ(ens, povm, fs.generators[0])
                achieved = num / den
        rows.append(
            {
                "subset": fs.label,
                "value": None if res.is_infinite else res.value,
                "achieved_ratio": achieved,
                "bound_violations": subset_violations,
            }
        )
        violations += subset_violations
    expected = None if union.is_infinite else 1.0 + union.value
    return WorstCaseReport("discrimination", union.value, expected, rows, violations, trials, seed)


def worst_case_exclusion(rho, free: FreeSetUnion, trials: int = 1000, seed: int = 0, tol: float = 1e-6, sample_budget: int = 16) -> WorstCaseReport:
    """Certify p_err(rho) >= (1 - WoR_k) min_sigma p_err(sigma) on random games.

    Singleton subsets achieve the error ratio 1 - WoR_k through the minimal
    relative eigenvector effect; 1 - sup_k ratio matches the union weight.
    """
    r = require_density(rho)
    d = r.shape[0]
    rng = np.random.default_rng(seed)
    union = weight_union(r, free, tol)
    rows = []
    violations = 0
    tasks = [_random_task(d, rng) for _ in range(trials)]
    observables = [task_observable(ens, povm) for ens, povm in tasks]
    for fs in free:
        res = weight_convex(r, fs, tol)
        samples = free_probe_states(fs, sample_budget, seed)
        if res.optimizer_sigma is not None:
            samples = samples + [res.optimizer_sigma]
        sample_stack = np.stack(samples)
        subset_violations = 0
        floor = (1.0 - res.value) * (1.0 - 10 * tol)
        for obs in observables:
            p_rho = np.trace(obs @ r).real
            p_free = np.einsum("sij,ji->s", sample_stack, obs).real.min()
            if p_rho < floor * p_free - 10 * tol:
                subset_violations += 1
        achieved = None
        if fs.kind == "singleton":
            effect = _achievability_effect(r, fs.generators[0], maximal=False)
            if effect is not None:
                identity = Channel([np.eye(d, dtype=complex)])
                ens = ChannelEnsemble(np.array([1.0, 0.0]), [identity, identity])
                povm = POVM([effect, np.eye(d) - effect])
                num = p_err(ens, povm, r)
                den = p_err(ens, povm, fs.generators[0])
                achieved = None if den <= 1e-12 else num / den
        rows.append(
            {
                "subset": fs.label,
                "value": res.value,
                "achieved_ratio": achieved,
                "bound_violations": subset_violations,
            }
        )
        violations += subset_violations
    expected = 1.0 - union.value
    return WorstCaseReport("exclusion", union.value, expected, rows, violations, trials, seed)
