"""Generalized robustness and weight of resource over unions of convex sets.

Singletons get eigenvalue closed forms; hulls run a bisection over the
mixing parameter with an eigenvalue-feasibility inner problem solved by
supergradient ascent on the simplex.  The union value is the minimum over
subsets.  Infinite robustness (support mismatch) is a first-class value,
not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bloch import from_bloch, to_bloch
from .errors import ValidationError
from .freesets import SUPPORT_CUTOFF, ConvexFreeSet, FreeSetUnion, barycenter
from .kernels import jacobi_eigh
from .operators import eigh_hermitian, require_density
from .simplex import _segment_search, golden_max

FEASIBILITY_TOL = 1e-9
LEAK_TOL = 1e-9
BISECT_MAX_ITERS = 60


@dataclass
class MeasureResult:
    """Outcome of a robustness/weight computation with its certificates."""

    value: float
    mode: str
    method: str
    tolerance: float
    optimizer_sigma: np.ndarray | None = None
    optimizer_tau: np.ndarray | None = None
    achieving_subset: str | None = None
    weights: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def to_dict(self) -> dict:
        return {
            "value": None if self.is_infinite else self.value,
            "infinite": self.is_infinite,
            "mode": self.mode,
            "method": self.method,
            "tolerance": self.tolerance,
            "achieving_subset": self.achieving_subset,
        }


def _pinv_sqrt(m: np.ndarray, cutoff: float = SUPPORT_CUTOFF):
    """Pseudo-inverse square root and support projector of a PSD operator."""
    w, v = eigh_hermitian(m)
    inv = np.where(w > cutoff, 1.0 / np.sqrt(np.clip(w, cutoff, None)), 0.0)
    keep = (w > cutoff).astype(float)
    root = (v * inv) @ v.conj().T
    proj = (v * keep) @ v.conj().T
    return root, proj


def _support_leak(m: np.ndarray, proj: np.ndarray) -> float:
    return float(np.trace(m - proj @ m @ proj).real)


def singleton_robustness_value(target: np.ndarray, sigma: np.ndarray) -> float:
    """min s with (1+s) sigma >= target, or inf on support mismatch."""
    root, proj = _pinv_sqrt(sigma)
    if _support_leak(target, proj) > LEAK_TOL:
        return math.inf
    w, _ = eigh_hermitian(root @ target @ root)
    return max(float(w[-1]) - 1.0, 0.0)


def singleton_weight_cstar(target: np.ndarray, sigma: np.ndarray, psd_eps: float = 1e-10) -> float:
    """max c with target >= c sigma (c in [0, 1] for equal traces)."""
    _, proj_t = _pinv_sqrt(target)
    if _support_leak(sigma, proj_t) > LEAK_TOL:
        return 0.0

    def ok(c):
        w, _ = eigh_hermitian(target - c * sigma)
        return w[0] >= -psd_eps

    if not ok(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    if ok(hi):
        return 1.0
    for _ in range(80):
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _mix(generators, p):
    return sum(pi * g for pi, g in zip(p, generators))


def hull_feasibility(
    s: float,
    target: np.ndarray,
    generators: list[np.ndarray],
    mode: str,
    feas_tol: float = FEASIBILITY_TOL,
    p_init=None,
):
    """Decide whether the mixing parameter s is feasible against a hull.

    robustness: exists p with (1+s) sum_i p_i G_i - target PSD (within tol);
    weight: exists p with target - (1-s) sum_i p_i G_i PSD.  Returns
    (feasible, p, lambda_min) for the best p found.
    """
    if mode == "robustness":
        coeff = 1.0 + s
    elif mode == "weight":
        coeff = -(1.0 - s)
    else:
        raise ValidationError(f"mode must be 'robustness' or 'weight', got {mode!r}")
    stack = np.stack([np.asarray(g, dtype=np.complex128) for g in generators])
    base = -target if mode == "robustness" else target
    k = len(generators)

    def affine(p):
        return base + coeff * np.tensordot(p, stack, axes=1)

    def lam_min(p):
        w, _ = jacobi_eigh(affine(p), compute_vectors=False)
        return float(w[0])

    if k == 1:
        best = lam_min(np.ones(1))
        return bool(best >= -feas_tol), np.ones(1), best

    if k == 2:
        t, best = golden_max(lambda t: lam_min(np.array([1.0 - t, t])), 0.0, 1.0, iters=72)
        p = np.array([1.0 - t, t])
        return bool(best >= -feas_tol), p, best

    if p_init is None:
        p = np.full(k, 1.0 / k)
    else:
        p = np.clip(np.asarray(p_init, dtype=float), 0.0, None)
        p = p / p.sum() if p.sum() > 0 else np.full(k, 1.0 / k)
    value = lam_min(p)

    # Frank-Wolfe vertex steps with two certified early exits: the iterate
    # itself proves feasibility, and the concavity gap bounds the maximum
    # from above to prove infeasibility.
    stall = 0
    for _ in range(400):
        if value >= -feas_tol:
            return True, p, value
        _, v = jacobi_eigh(affine(p))
        vec = v[:, 0]
        grad = np.array([coeff * np.real(vec.conj() @ (g @ vec)) for g in generators])
        gap = float(np.max(grad) - grad @ p)
        if value + max(gap, 0.0) < -feas_tol:
            return False, p, value
        j = int(np.argmax(grad))
        direction = -p.copy()
        direction[j] += 1.0
        t, val = _segment_search(lam_min, p, direction, 1.0, iters=36)
        if val > value + 1e-12:
            p = p + t * direction
            value = val
            stall = 0
        else:
            stall += 1
            if stall >= 2:
                break

    # Pairwise-exchange polish for the kink cases the single supergradient
    # cannot certify.
    for _ in range(12):
        if value >= -feas_tol:
            return True, p, value
        best_gain, best_p = 0.0, None
        for a in range(k):
            if p[a] <= 0:
                continue
            for b in range(k):
                if a == b:
                    continue
                direction = np.zeros(k)
                direction[a] = -1.0
                direction[b] = 1.0
                t, val = _segment_search(lam_min, p, direction, p[a], iters=36)
                if val > value + best_gain:
                    best_gain, best_p = val - value, p + t * direction
        if best_p is None or best_gain <= 1e-10 * (1.0 + abs(value)):
            break
        p = np.clip(best_p, 0.0, None)
        p /= p.sum()
        value = lam_min(p)
    return bool(value >= -feas_tol), p, value


def feasibility(s: float, rho, fs: ConvexFreeSet, mode: str = "robustness", feas_tol: float = FEASIBILITY_TOL):
    """Public feasibility test returning (feasible, weights, tau certificate)."""
    r = require_density(rho)
    if mode == "robustness" and s < 0:
        raise ValidationError(f"robustness mode needs s >= 0, got {s}")
    if mode == "weight" and not 0 <= s <= 1:
        raise ValidationError(f"weight mode needs 0 <= s <= 1, got {s}")
    ok, p, _ = hull_feasibility(s, r, fs.generators, mode, feas_tol)
    if not ok:
        return False, p, None
    sigma = _mix(fs.generators, p)
    tau = _certificate_tau(r, sigma, s, mode)
    return True, p, tau


def _positive_part(m: np.ndarray) -> np.ndarray:
    w, v = eigh_hermitian(m)
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


def _certificate_tau(target: np.ndarray, sigma: np.ndarray, s: float, mode: str) -> np.ndarray:
    """Noise certificate tau recovered from the feasible decomposition."""
    if s <= 0:
        return target.copy()
    if mode == "robustness":
        raw = ((1.0 + s) * sigma - target) / s
    else:
        raw = (target - (1.0 - s) * sigma) / s
    pos = _positive_part(raw)
    tr = np.trace(pos).real
    scale = np.trace(target).real
    if tr <= 0:
        return target.copy()
    return pos * (scale / tr)


def hull_measure_bisect(target: np.ndarray, generators: list[np.ndarray], mode: str, tol: float, s_hi: float | None = None, feas_tol: float = FEASIBILITY_TOL):
    """Bisection on s against a hull; returns (value, p) or (inf, None)."""
    if mode == "robustness":
        if s_hi is None:
            s_hi = singleton_robustness_value(target, sum(generators) / len(generators))
        if math.isinf(s_hi):
            return math.inf, None
        s_hi = max(s_hi, tol)
    else:
        s_hi = 1.0

    warm = {"p": None}

    def feas(s):
        ok, p, _ = hull_feasibility(s, target, generators, mode, feas_tol, p_init=warm["p"])
        warm["p"] = p
        return ok, p

    ok_lo, p_lo = feas(0.0)
    if ok_lo:
        return 0.0, p_lo
    ok_hi, p_hi = feas(s_hi)
    tries = 0
    while not ok_hi and mode == "robustness" and tries < 8:
        s_hi *= 2.0
        ok_hi, p_hi = feas(s_hi)
        tries += 1
    if not ok_hi:
        return math.inf, None
    lo, hi, p_best = 0.0, s_hi, p_hi
    for _ in range(BISECT_MAX_ITERS):
        if hi - lo < tol:
            break
        mid = (lo + hi) / 2
        ok_mid, p_mid = feas(mid)
        if ok_mid:
            hi, p_best = mid, p_mid
        else:
            lo = mid
    return hi, p_best


def _qubit_axis_closed_form(rho: np.ndarray, fs: ConvexFreeSet):
    """Closed-form robustness against a single-qubit incoherent basis.

    The free segment is the Bloch-ball diameter along the basis axis; the
    robustness is the Bloch-vector component orthogonal to that axis.
    """
    r = to_bloch(rho)
    axis = to_bloch(fs.generators[0])
    norm = np.linalg.norm(axis)
    axis = axis / norm
    parallel = float(np.dot(r, axis))
    value = math.sqrt(max(float(np.dot(r, r)) - parallel**2, 0.0))
    sigma = from_bloch(parallel / (1.0 + value) * axis)
    return value, sigma


def robustness_convex(rho, fs: ConvexFreeSet, tol: float = 1e-7, method: str = "auto") -> MeasureResult:
    """Generalized robustness against one convex subset."""
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    r = require_density(rho)
    if r.shape[0] != fs.dim:
        raise ValidationError("state and free set dimensions differ")

    if fs.kind == "singleton" and method in ("auto", "closed"):
        sigma = fs.generators[0]
        value = singleton_robustness_value(r, sigma)
        if math.isinf(value):
            return MeasureResult(math.inf, "robustness", "closed", tol, None, None, fs.label)
        tau = _certificate_tau(r, sigma, value, "robustness")
        return MeasureResult(value, "robustness", "closed", tol, sigma, tau, fs.label, np.ones(1))

    if fs.kind == "incoherent_basis" and fs.dim == 2 and method in ("auto", "closed"):
        value, sigma = _qubit_axis_closed_form(r, fs)
        tau = _certificate_tau(r, sigma, value, "robustness")
        return MeasureResult(value, "robustness", "closed", tol, sigma, tau, fs.label)

    if method == "closed":
        raise ValidationError(f"no closed form available for kind {fs.kind!r} at dim {fs.dim}")

    bary = barycenter(fs)
    s_hi = singleton_robustness_value(r, bary)
    value, p = hull_measure_bisect(r, fs.generators, "robustness", tol, s_hi=s_hi)
    if math.isinf(value):
        return MeasureResult(math.inf, "robustness", "bisection", tol, None, None, fs.label)
    sigma = _mix(fs.generators, p)
    tau = _certificate_tau(r, sigma, value, "robustness")
    return MeasureResult(value, "robustness", "bisection", tol, sigma, tau, fs.label, p)


def weight_convex(rho, fs: ConvexFreeSet, tol: float = 1e-7, method: str = "auto") -> MeasureResult:
    """Weight of resource against one convex subset (always finite, <= 1)."""
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    r = require_density(rho)
    if r.shape[0] != fs.dim:
        raise ValidationError("state and free set dimensions differ")

    if fs.kind == "singleton" and method in ("auto", "closed"):
        sigma = fs.generators[0]
        cstar = singleton_weight_cstar(r, sigma)
        value = 1.0 - cstar
        tau = _certificate_tau(r, sigma, value, "weight")
        return MeasureResult(value, "weight", "closed", tol, sigma, tau, fs.label, np.ones(1))

    if method == "closed":
        raise ValidationError(f"no closed form available for kind {fs.kind!r}")

    value, p = hull_measure_bisect(r, fs.generators, "weight", tol)
    sigma = _mix(fs.generators, p)
    tau = _certificate_tau(r, sigma, value, "weight")
    return MeasureResult(value, "weight", "bisection", tol, sigma, tau, fs.label, p)


def _union_min(rho, union: FreeSetUnion, tol: float, method: str, convex_fn) -> MeasureResult:
    best: MeasureResult | None = None
    for fs in union:
        res = convex_fn(rho, fs, tol, method)
        if best is None or res.value < best.value:
            best = res
    return best


def robustness_union(rho, union: FreeSetUnion, tol: float = 1e-7, method: str = "auto") -> MeasureResult:
    """min over subsets of the convex robustness (the union robustness)."""
    return _union_min(rho, union, tol, method, robustness_convex)


def weight_union(rho, union: FreeSetUnion, tol: float = 1e-7, method: str = "auto") -> MeasureResult:
    """min over subsets of the convex weight (the union weight)."""
    return _union_min(rho, union, tol, method, weight_convex)


def ray_parameter(rho, eta, tau, mode: str = "robustness", spread_tol: float = 1e-8):
    """Ray coordinate u of tau on the line through rho and eta, if any.

    Valid decompositions require u > 1 (robustness: eta = (rho + q tau)/(1+q)
    with q = 1/(u-1)) or u < 0 (weight: rho = q tau + (1-q) eta with
    q = 1/(1-u)).  Returns None when tau is off the ray or u is out of range.
    """
    r = to_bloch(require_density(rho))
    x = to_bloch(require_density(eta))
    t = to_bloch(require_density(tau))
    direction = x - r
    scale = np.linalg.norm(direction)
    if scale < 1e-12:
        raise ValidationError("ray parameter is undefined for eta = rho (any q works)")
    main = np.abs(direction) > 1e-12
    ratios = (t[main] - r[main]) / direction[main]
    u = float(np.median(ratios))
    if np.max(np.abs(ratios - u)) > spread_tol * (1.0 + abs(u)):
        return None
    # components with no variation along the ray must not move either
    off = ~main
    if np.any(off) and np.max(np.abs(t[off] - r[off])) > spread_tol * (1.0 + abs(u)):
        return None
    if mode == "robustness":
        return u if u > 1.0 else None
    if mode == "weight":
        return u if u < 0.0 else None
    raise ValidationError(f"mode must be 'robustness' or 'weight', got {mode!r}")
