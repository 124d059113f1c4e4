"""Multicopy witness families for robustness and weight.

A witness member W_m acts on m tensor copies and reproduces the positivity
polynomial of the shifted operator: tr[W_m eta^(x m)] = S_m of the
robustness/weight shift of eta.  Three interchangeable builders are
provided (checked against each other in the tests):

* monomial / symmetric: expand the polynomial in Bloch monomials fitted by
  least squares, then map each monomial to a Gell-Mann tensor word;
* exact: contract the base state into the antisymmetrizer directly, which
  needs no fit and scales to any monomial count.

Shifting a family turns the sign pattern into the conventional witness
form (resource strictly negative for all m, every free state nonnegative
somewhere); a bisection over the family parameter recovers the measure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bloch import gellmann_basis, s_poly, shifted_operator, to_bloch
from .errors import DegenerateShiftError, ResourceCapError, ValidationError
from .freesets import ConvexFreeSet, FreeSetUnion, sample, segment_grid
from .operators import (
    TENSOR_DIM_CAP,
    kron_all,
    kron_power,
    operator_norm,
    random_density_stream,
    random_pure,
    require_density,
    require_hermitian,
)

MONOMIAL_CAP = 2000
SEGMENT_GRID_POINTS = 1000


@dataclass
class PolynomialForm:
    """Bloch-monomial expansion of the shift polynomial S_m."""

    dim: int
    degree: int
    mode: str
    s: float
    exponents: list[tuple[int, ...]]
    coefficients: np.ndarray
    fit_residual: float

    def evaluate(self, coords) -> float:
        x = np.asarray(coords, dtype=float)
        total = 0.0
        for exp, c in zip(self.exponents, self.coefficients):
            term = c
            for j, n in enumerate(exp):
                if n:
                    term *= x[j] ** n
            total += term
        return float(total)


@dataclass
class WitnessFamily:
    """Members m -> Hermitian operator on the m-fold tensor power."""

    kind: str
    base_state: np.ndarray
    s: float
    members: dict[int, np.ndarray]
    builder: str
    shifted: bool = False
    shift_deltas: dict[int, float] = field(default_factory=dict)
    shift_scale: float | None = None

    @property
    def m_values(self) -> list[int]:
        return sorted(self.members)


def monomial_exponents(d: int, m: int, cap: int = MONOMIAL_CAP) -> list[tuple[int, ...]]:
    """Exponent tuples over d^2 - 1 Bloch variables with total degree <= m.

    Graded order (degree first, then lexicographic on the variable word).
    """
    nvars = d * d - 1
    count = math.comb(nvars + m, m)
    if count > cap:
        raise ResourceCapError(
            f"{count} monomials exceed the cap {cap} for d={d}, m={m}; use build_witness_exact"
        )
    out = []
    for degree in range(m + 1):
        for word in itertools.combinations_with_replacement(range(nvars), degree):
            exp = [0] * nvars
            for var in word:
                exp[var] += 1
            out.append(tuple(exp))
    return out


def _mode_from_kind(kind: str) -> str:
    if kind not in ("robustness", "weight"):
        raise ValidationError(f"kind must be 'robustness' or 'weight', got {kind!r}")
    return kind


def _check_s(kind: str, s: float) -> None:
    if kind == "robustness" and not s > 0:
        raise ValidationError(f"robustness witnesses need s > 0, got {s}")
    if kind == "weight" and not 0 < s < 1:
        raise ValidationError(f"weight witnesses need 0 < s < 1, got {s}")


def fit_s_polynomial(rho, s: float, m: int, mode: str = "robustness", seed: int = 0, cap: int = MONOMIAL_CAP) -> PolynomialForm:
    """Least-squares extraction of the Bloch-monomial coefficients of S_m."""
    r = require_density(rho)
    d = r.shape[0]
    if not 2 <= m <= d:
        raise ValidationError(f"witness copy count m={m} out of range 2..{d}")
    _check_s(mode, s)
    exponents = monomial_exponents(d, m, cap)
    n_mono = len(exponents)

    rng = np.random.default_rng(seed)
    probes = [np.eye(d, dtype=complex) / d]
    probes.extend(random_density_stream(d, 2 * n_mono, seed=seed + 1))
    probes.extend(random_pure(d, rng) for _ in range(max(n_mono // 4, 8)))

    coords = np.array([to_bloch(p) for p in probes])
    target = np.array([s_poly(shifted_operator(r, p, s, mode), m) for p in probes])
    design = np.ones((len(probes), n_mono))
    for j, exp in enumerate(exponents):
        for var, n in enumerate(exp):
            if n:
                design[:, j] *= coords[:, var] ** n
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.max(np.abs(design @ coeffs - target)))
    return PolynomialForm(d, m, mode, s, exponents, coeffs, residual)


def _monomial_slots(exp: tuple[int, ...], m: int) -> list[int]:
    """Slot labels for one monomial: variable indices then -1 identity padding."""
    slots = []
    for var, n in enumerate(exp):
        slots.extend([var] * n)
    slots.extend([-1] * (m - len(slots)))
    return slots


def build_witness_monomial(form: PolynomialForm, cap: int = TENSOR_DIM_CAP) -> np.ndarray:
    """Witness from the ordered tensor-word construction (one word per monomial)."""
    d, m = form.dim, form.degree
    basis = gellmann_basis(d)
    eye = np.eye(d, dtype=complex)
    out = np.zeros((d**m, d**m), dtype=complex)
    for exp, c in zip(form.exponents, form.coefficients):
        degree = sum(exp)
        slots = _monomial_slots(exp, m)
        mats = [basis[v] if v >= 0 else eye for v in slots]
        prefactor = (d / (2.0 * (d - 1))) ** (degree / 2.0)
        out = out + prefactor * c * kron_all(mats, cap=cap)
    return (out + out.conj().T) / 2


def build_witness_symmetric(form: PolynomialForm, cap: int = TENSOR_DIM_CAP) -> np.ndarray:
    """Witness averaged over slot permutations (invariant under copy swaps)."""
    d, m = form.dim, form.degree
    basis = gellmann_basis(d)
    eye = np.eye(d, dtype=complex)
    out = np.zeros((d**m, d**m), dtype=complex)
    for exp, c in zip(form.exponents, form.coefficients):
        degree = sum(exp)
        slots = _monomial_slots(exp, m)
        weight = math.factorial(m - degree)
        for n in exp:
            weight *= math.factorial(n)
        weight /= math.factorial(m)
        prefactor = (d / (2.0 * (d - 1))) ** (degree / 2.0)
        acc = np.zeros_like(out)
        for perm in sorted(set(itertools.permutations(slots))):
            mats = [basis[v] if v >= 0 else eye for v in perm]
            acc = acc + kron_all(mats, cap=cap)
        out = out + prefactor * c * weight * acc
    return (out + out.conj().T) / 2


def _permutation_parity(perm) -> int:
    seen = [False] * len(perm)
    parity = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        node = start
        while not seen[node]:
            seen[node] = True
            node = perm[node]
            length += 1
        parity += length - 1
    return -1 if parity % 2 else 1


def _permutation_operator(dim: int, perm) -> np.ndarray:
    """Unitary moving tensor slot j to slot perm[j] on (C^dim)^(x n)."""
    n = len(perm)
    size = dim**n
    idx = np.arange(size)
    digits = []
    rem = idx.copy()
    for _ in range(n):
        digits.append(rem % dim)
        rem //= dim
    digits.reverse()  # digits[slot] for slot-major encoding
    out_digits = [None] * n
    for j, pj in enumerate(perm):
        out_digits[pj] = digits[j]
    out_idx = np.zeros(size, dtype=np.int64)
    for slot in range(n):
        out_idx = out_idx * dim + out_digits[slot]
    op = np.zeros((size, size))
    op[out_idx, idx] = 1.0
    return op


_ASYM_CACHE: dict[tuple[int, int], np.ndarray] = {}


def antisymmetrizer(dim: int, m: int, cap: int = TENSOR_DIM_CAP) -> np.ndarray:
    """Projector onto the antisymmetric subspace of (C^dim)^(x m).

    Contracted against a tensor power it yields the elementary symmetric
    polynomials: tr[P A^(x m)] = e_m(eigenvalues of A).
    """
    if dim**m > cap:
        raise ResourceCapError(f"antisymmetrizer dimension {dim}^{m} exceeds the tensor cap {cap}")
    key = (dim, m)
    if key in _ASYM_CACHE:
        return _ASYM_CACHE[key]
    size = dim**m
    acc = np.zeros((size, size))
    for perm in itertools.permutations(range(m)):
        acc += _permutation_parity(perm) * _permutation_operator(dim, perm)
    acc /= math.factorial(m)
    acc.flags.writeable = False
    _ASYM_CACHE[key] = acc
    return acc


def _trace_out_last(x: np.ndarray, dim: int, m: int, keep: int) -> np.ndarray:
    """Partial trace over the last m - keep tensor slots."""
    front = dim**keep
    back = dim ** (m - keep)
    t = x.reshape(front, back, front, back)
    return np.einsum("ijkj->ik", t)


def build_witness_exact(rho, s: float, m: int, mode: str = "robustness", cap: int = TENSOR_DIM_CAP, eval_trace: float = 1.0) -> np.ndarray:
    """Fit-free witness via antisymmetrizer contraction.

    Satisfies tr[W eta^(x m)] = S_m(shift of eta) exactly (to rounding) for
    every Hermitian eta of trace ``eval_trace`` (1 for states, d1 for Choi
    operators), because identity padding absorbs the dropped copies.
    """
    base = require_hermitian(rho)
    d = base.shape[0]
    if not 2 <= m <= d:
        raise ValidationError(f"witness copy count m={m} out of range 2..{d}")
    _check_s(mode, s)
    if mode == "robustness":
        alpha, beta = (1.0 + s) / s, -1.0 / s
    else:
        alpha, beta = -(1.0 - s) / s, 1.0 / s

    asym = antisymmetrizer(d, m, cap)
    pad = np.eye(d, dtype=complex) / eval_trace
    out = np.zeros((d**m, d**m), dtype=complex)
    for k in range(m + 1):
        coeff = (alpha**k) * (beta ** (m - k)) * math.comb(m, k)
        if k == m:
            out = out + coeff * asym
            continue
        rho_block = kron_power(base, m - k, cap=cap)
        weighted = asym @ (np.kron(np.eye(d**k, dtype=complex), rho_block) if k else rho_block)
        g = _trace_out_last(weighted, d, m, k)
        if k == 0:
            out = out + coeff * g[0, 0].real * kron_power(pad, m, cap=cap)
        else:
            out = out + coeff * np.kron(g, kron_power(pad, m - k, cap=cap))
    return (out + out.conj().T) / 2


def build_qubit_witness(rho, s: float) -> np.ndarray:
    """Closed-form two-copy qubit witness from the explicit Pauli expansion.

    Normalized so that tr[W eta^(x 2)] = S_2 of the robustness shift, which
    is 1/4 of the textbook Pauli form (the I (x) I trace carries a factor 4).
    """
    r = require_density(rho)
    if r.shape[0] != 2:
        raise ValidationError("the closed-form qubit witness needs d = 2")
    if not s > 0:
        raise ValidationError(f"robustness witnesses need s > 0, got {s}")
    paulis = gellmann_basis(2)
    coords = to_bloch(r)
    eye = np.eye(2, dtype=complex)
    out = (1.0 - float(coords @ coords) / s**2) * np.kron(eye, eye)
    for rj, sigma in zip(coords, paulis):
        out = out - ((1.0 + s) ** 2 / s**2) * np.kron(sigma, sigma)
        out = out + ((1.0 + s) / s**2) * rj * (np.kron(eye, sigma) + np.kron(sigma, eye))
    return out / 4.0


def build_family(rho, s: float, kind: str = "robustness", m_values=None, builder: str = "exact", seed: int = 0) -> WitnessFamily:
    """Assemble the witness family (default m = 2, ..., d)."""
    r = require_density(rho)
    d = r.shape[0]
    mode = _mode_from_kind(kind)
    _check_s(kind, s)
    if m_values is None:
        m_values = range(2, d + 1)
    members: dict[int, np.ndarray] = {}
    for m in m_values:
        if builder == "exact":
            members[m] = build_witness_exact(r, s, m, mode)
        elif builder in ("monomial", "symmetric"):
            form = fit_s_polynomial(r, s, m, mode, seed=seed)
            build = build_witness_monomial if builder == "monomial" else build_witness_symmetric
            members[m] = build(form)
        elif builder == "qubit" and d == 2 and m == 2 and mode == "robustness":
            members[m] = build_qubit_witness(r, s)
        else:
            raise ValidationError(f"unknown builder {builder!r} for d={d}, m={m}, mode={mode}")
    return WitnessFamily(kind, r, s, members, builder)


def family_expectations(family: WitnessFamily, eta) -> dict[int, float]:
    """tr[W_m eta^(x m)] for every member."""
    e = np.asarray(eta, dtype=complex)
    out = {}
    for m, w in family.members.items():
        power = kron_power(e, m)
        out[m] = float(np.trace(w @ power).real)
    return out


def free_probe_states(fs: ConvexFreeSet, budget: int, seed: int) -> list[np.ndarray]:
    """Free-state probes for shift constants and verification sweeps.

    Singletons are exact; qubit incoherent bases use a fine deterministic
    segment grid; general hulls fall back to Dirichlet sampling with the
    generators and barycenter always included.
    """
    if fs.kind == "singleton":
        return [fs.generators[0]]
    if len(fs.generators) == 2:
        return segment_grid(fs, max(SEGMENT_GRID_POINTS, budget))
    return sample(fs, budget, seed)


def shift_family(family: WitnessFamily, free: FreeSetUnion, sample_budget: int = 64, seed: int = 0) -> WitnessFamily:
    """Conventional-form witnesses: W~_m = -C (W_m + delta_m I).

    delta_m is half the sampled minimum of |tr[W_m sigma^(x m)]| over the
    free probes (exact for singletons); C normalizes by the largest member
    operator norm.  A vanishing delta means s is at or beyond the measure
    value and the shift would be degenerate.
    """
    if family.shifted:
        raise ValidationError("family is already shifted")
    probes = []
    for fs in free:
        probes.extend(free_probe_states(fs, sample_budget, seed))
    deltas: dict[int, float] = {}
    for m, w in family.members.items():
        values = [abs(np.trace(w @ kron_power(p, m)).real) for p in probes]
        deltas[m] = 0.5 * min(values)
        if deltas[m] < 1e-12:
            raise DegenerateShiftError(
                f"shift constant vanished at m={m}, s={family.s}; s is likely at or above the measure value"
            )
    scale = 1.0 / max(operator_norm(w) for w in family.members.values())
    members = {}
    for m, w in family.members.items():
        members[m] = -scale * (w + deltas[m] * np.eye(w.shape[0]))
    return WitnessFamily(family.kind, family.base_state, family.s, members, family.builder, True, deltas, scale)


@dataclass
class WitnessReport:
    """Outcome of checking the family sign pattern on base state and free probes."""

    s: float
    kind: str
    shifted: bool
    base_values: dict[int, float]
    base_ok: bool
    sample_subsets: list[str]
    detections: list[int | None]
    verdict: bool

    @property
    def n_samples(self) -> int:
        return len(self.detections)

    @property
    def undetected(self) -> int:
        return sum(1 for m in self.detections if m is None)

    def to_dict(self) -> dict:
        per_subset: dict[str, int] = {}
        for label, det in zip(self.sample_subsets, self.detections):
            if det is None:
                per_subset[label] = per_subset.get(label, 0) + 1
        return {
            "s": self.s,
            "kind": self.kind,
            "shifted": self.shifted,
            "base_values": {str(m): v for m, v in sorted(self.base_values.items())},
            "base_ok": self.base_ok,
            "n_free_samples": self.n_samples,
            "n_undetected": self.undetected,
            "undetected_by_subset": per_subset,
            "verdict": self.verdict,
        }


def verify_family(family: WitnessFamily, rho, free: FreeSetUnion, sample_budget: int = 200, tol: float = 1e-9, seed: int = 0, probes=None) -> WitnessReport:
    """Check the witness sign pattern on the base state and free probes.

    Unshifted families follow the raw polynomial pattern (base state
    nonnegative for every m; each free probe strictly negative for some m).
    Shifted families follow the conventional pattern with both signs flipped.
    The verdict is true exactly when both sides hold, which happens iff the
    parameter s sits below the corresponding measure of rho.
    """
    r = require_density(rho)
    base_values = family_expectations(family, r)
    if family.shifted:
        base_ok = max(base_values.values()) < 0.0
    else:
        base_ok = min(base_values.values()) >= -tol

    if probes is None:
        probes = []
        for fs in free:
            for state in free_probe_states(fs, sample_budget, seed):
                probes.append((fs.label, state))
    labels = []
    detections: list[int | None] = []
    for label, state in probes:
        values = family_expectations(family, state)
        found = None
        for m in sorted(values):
            hit = values[m] >= 0.0 if family.shifted else values[m] < -tol
            if hit:
                found = m
                break
        labels.append(label)
        detections.append(found)
    free_ok = all(det is not None for det in detections)
    return WitnessReport(family.s, family.kind, family.shifted, base_values, base_ok, labels, detections, base_ok and free_ok)


@dataclass
class SweepReport:
    """Result of bisecting the witness verdict over the family parameter."""

    kind: str
    estimate: float
    bracket: tuple[float, float]
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "estimate": None if math.isinf(self.estimate) else self.estimate,
            "infinite": math.isinf(self.estimate),
            "bracket": [None if math.isinf(b) else b for b in self.bracket],
            "evaluations": self.evaluations,
        }


def estimate_measure_via_witness(
    rho,
    free: FreeSetUnion,
    kind: str = "robustness",
    tol: float = 1e-3,
    sample_budget: int = 200,
    seed: int = 0,
    m_values=None,
    s_cap: float = 64.0,
) -> SweepReport:
    """Recover the measure as the sign-flip point of the witness verdict.

    sup{s : the family at s is a witness} equals the generalized robustness
    (kind="robustness") or the weight of resource (kind="weight").
    """
    r = require_density(rho)
    probes = []
    for fs in free:
        for state in free_probe_states(fs, sample_budget, seed):
            probes.append((fs.label, state))
    evals = 0

    def verdict(s: float) -> bool:
        nonlocal evals
        evals += 1
        family = build_family(r, s, kind, m_values=m_values)
        return verify_family(family, r, free, probes=probes).verdict

    if kind == "weight":
        lo, hi = 0.0, 1.0 - 1e-9
        if verdict(hi):
            return SweepReport(kind, 1.0, (hi, 1.0), evals)
    else:
        lo, hi = 0.0, 1.0
        while verdict(hi):
            lo, hi = hi, hi * 2
            if hi > s_cap:
                return SweepReport(kind, math.inf, (lo, math.inf), evals)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if verdict(mid):
            lo = mid
        else:
            hi = mid
    return SweepReport(kind, (lo + hi) / 2, (lo, hi), evals)
