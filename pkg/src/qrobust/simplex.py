"""Concave maximization over the probability simplex.

The inner problems here are maxima of lambda_min-style concave maps over a
handful of mixing weights.  Two generators reduce to an exact golden-section
search on the segment; more generators run supergradient Frank-Wolfe vertex
steps followed by pairwise-exchange polish sweeps, which cope with the
eigenvalue-crossing kinks where a bare improvement rule stalls.
"""

from __future__ import annotations

import math

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, lo: float = 0.0, hi: float = 1.0, iters: int = 70):
    """Maximize a concave scalar function on [lo, hi]; returns (x, f(x))."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
    candidates = [(f(lo), lo), (f1, x1), (f2, x2), (f(hi), hi)]
    best_val, best_x = max(candidates, key=lambda t: t[0])
    return best_x, best_val


def _segment_search(value_fn, p, direction, t_max, iters=60):
    """Maximize value_fn(p + t * direction) over t in [0, t_max]."""
    if t_max <= 0:
        return 0.0, value_fn(p)

    def at(t):
        return value_fn(p + t * direction)

    t, val = golden_max(at, 0.0, t_max, iters)
    return t, val


def maximize_on_simplex(
    value_fn,
    supergrad_fn,
    k: int,
    p_init=None,
    max_iters: int = 10_000,
    improvement_tol: float = 1e-11,
):
    """Maximize a concave function of simplex weights; returns (p, value).

    Deterministic for fixed inputs.  ``p_init`` warm-starts the search (it is
    projected onto the simplex by clipping and renormalizing).
    """
    if p_init is None:
        p = np.full(k, 1.0 / k)
    else:
        p = np.clip(np.asarray(p_init, dtype=float), 0.0, None)
        total = p.sum()
        p = p / total if total > 0 else np.full(k, 1.0 / k)
    value = value_fn(p)
    if k == 1:
        return p, value

    if k == 2:
        t, val = golden_max(lambda t: value_fn(np.array([1.0 - t, t])), 0.0, 1.0, iters=80)
        if val >= value:
            return np.array([1.0 - t, t]), val
        return p, value

    # Frank-Wolfe phase: line search toward the supergradient-best vertex.
    stall = 0
    iters_used = 0
    while iters_used < max_iters and stall < 2:
        iters_used += 1
        grad = np.asarray(supergrad_fn(p))
        j = int(np.argmax(grad))
        direction = -p.copy()
        direction[j] += 1.0
        t, val = _segment_search(value_fn, p, direction, 1.0, iters=36)
        if val > value + improvement_tol:
            p = p + t * direction
            value = val
            stall = 0
        else:
            stall += 1

    # Polish phase: exchange mass between coordinate pairs (plus a blend
    # toward uniform) until nothing improves beyond golden-search noise.
    polish_tol = max(improvement_tol, 1e-10 * (1.0 + abs(value)))
    for _ in range(40):
        best_gain = 0.0
        best_p = None
        for a in range(k):
            for b in range(k):
                if a == b:
                    continue
                mass = p[a]
                if mass <= 0:
                    continue
                direction = np.zeros(k)
                direction[a] = -1.0
                direction[b] = 1.0
                t, val = _segment_search(value_fn, p, direction, mass, iters=36)
                if val > value + best_gain:
                    best_gain = val - value
                    best_p = p + t * direction
        blend = np.full(k, 1.0 / k) - p
        t, val = _segment_search(value_fn, p, blend, 1.0, iters=36)
        if val > value + best_gain:
            best_gain = val - value
            best_p = p + t * blend
        if best_gain <= polish_tol or best_p is None:
            break
        p = np.clip(best_p, 0.0, None)
        p /= p.sum()
        value = value_fn(p)
    return p, value
