"""Pure-NumPy implementations of the hot numerical kernels.

The compiled extension (``credro._kernels``) mirrors this module function
for function; :mod:`credro._backend` picks whichever is available.  Keep
the two in semantic lockstep: same arguments, same return structure, same
conventions (entropy in nats, ``0 * ln 0 == 0``).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# Bisection on the water level stops when |sum(p) - 1| falls below this.
_LEVEL_TOL = 1e-12
_LEVEL_MAX_ITER = 200


def _xlogx(x: np.ndarray) -> np.ndarray:
    """x * ln(x) with the 0 * ln 0 == 0 convention."""
    out = np.zeros_like(x)
    mask = x > 0.0
    out[mask] = x[mask] * np.log(x[mask])
    return out


def shannon_entropy(p) -> float:
    """Shannon entropy in nats of a probability vector."""
    return float(-_xlogx(np.asarray(p, dtype=np.float64)).sum())


def entropy_rows(rows) -> np.ndarray:
    """Per-row Shannon entropy of an (N, C) array of probability vectors."""
    return -_xlogx(np.asarray(rows, dtype=np.float64)).sum(axis=1)


def waterfill_box(lo, hi):
    """Maximize entropy over {lo <= p <= hi, sum(p) = 1}.

    The maximizer clamps every coordinate to a common level ``c``:
    ``p_k = clip(c, lo_k, hi_k)``.  The level is found by bisection on the
    monotone function ``g(c) = sum(clip(c, lo, hi)) - 1`` and then refined
    exactly once the clamp pattern is known.

    Returns ``(entropy, argmax)``.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    a = float(lo.min())
    b = float(hi.max())
    c = 0.5 * (a + b)
    for _ in range(_LEVEL_MAX_ITER):
        c = 0.5 * (a + b)
        g = float(np.clip(c, lo, hi).sum()) - 1.0
        if abs(g) <= _LEVEL_TOL:
            break
        if g < 0.0:
            a = c
        else:
            b = c
    p = np.clip(c, lo, hi)
    # Exact level on the identified pattern: free coordinates share the
    # residual mass equally.
    at_hi = hi <= c
    at_lo = lo >= c
    free = ~(at_hi | at_lo)
    n_free = int(free.sum())
    if n_free > 0:
        residual = 1.0 - float(hi[at_hi].sum()) - float(lo[at_lo].sum())
        level = residual / n_free
        if (
            np.all(lo[free] <= level)
            and np.all(level <= hi[free])
            and np.all(hi[at_hi] <= level)
            and np.all(lo[at_lo] >= level)
        ):
            p = np.where(at_hi, hi, np.where(at_lo, lo, level))
    return float(-_xlogx(p).sum()), p


def box_lower_vertices(lo, hi):
    """Minimize entropy over {lo <= p <= hi, sum(p) = 1} by vertex enumeration.

    Every extreme point of the feasible polytope pins all but at most one
    coordinate to a bound; the free coordinate absorbs the residual mass.
    Enumerates the free index and all 2^(C-1) bound assignments of the
    rest.  Cost grows as C * 2^(C-1); callers gate on C.

    Returns ``(entropy, argmin)``.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    c = lo.size
    n_other = c - 1
    masks = np.arange(1 << n_other, dtype=np.uint32)
    bits = ((masks[:, None] >> np.arange(n_other, dtype=np.uint32)) & 1).astype(bool)
    # bound values and their x*ln(x) terms, tabulated once
    t_lo = _xlogx(lo)
    t_hi = _xlogx(hi)
    best_h = np.inf
    best_p = None
    idx = np.arange(c)
    for f in range(c):
        others = np.concatenate([idx[:f], idx[f + 1 :]])
        assigned = np.where(bits, hi[others], lo[others])
        residual = 1.0 - assigned.sum(axis=1)
        ok = (residual >= lo[f] - 1e-12) & (residual <= hi[f] + 1e-12)
        if not ok.any():
            continue
        rows = assigned[ok]
        res = np.clip(residual[ok], lo[f], hi[f])
        h_assigned = np.where(bits[ok], t_hi[others], t_lo[others]).sum(axis=1)
        h = -h_assigned - _xlogx(res)
        j = int(np.argmin(h))
        if h[j] < best_h:
            best_h = float(h[j])
            p = np.empty(c)
            p[others] = rows[j]
            p[f] = res[j]
            best_p = p
    return best_h, best_p


def hull_upper_cg(P, improve_tol: float = 1e-10, max_iter: int = 10000):
    """Maximize H(w @ P) over the weight simplex by conditional gradient.

    Pairwise variant: each iteration linearizes the objective at the
    current mixture and transfers weight from the worst active member to
    the best one, with the 1-D step solved exactly (the restriction is
    strictly concave; 60 bisection steps on its derivative).  Uniform
    initialization, so iteration zero reproduces the plain ensemble
    mean.  The plain toward-one-vertex step stalls well short of
    optimality on this objective; the pairwise step does not.

    Stops when the linearized optimality gap certifies the value to
    1e-12, when an iteration improves by less than ``improve_tol`` with
    the gap already below 1e-9, or at ``max_iter``.  Returns
    ``(entropy, weights, iterations)``.
    """
    P = np.ascontiguousarray(P, dtype=np.float64)
    m = P.shape[0]
    w = np.full(m, 1.0 / m)
    q = w @ P
    h = float(-_xlogx(q).sum())
    if m == 1:
        return h, w, 0
    tiny = 1e-300
    it = 0
    for it in range(1, max_iter + 1):
        grad = -np.log(np.maximum(q, tiny)) - 1.0
        scores = P @ grad
        best = int(np.argmax(scores))
        # optimality certificate: value gap <= max score - current slope
        gap = float(scores[best] - q @ grad)
        if gap <= 1e-12:
            break
        active = np.flatnonzero(w > 0.0)
        worst = int(active[np.argmin(scores[active])])
        if worst == best:
            break
        d = P[best] - P[worst]
        t_max = float(w[worst])

        def slope(t):
            qt = np.maximum(q + t * d, tiny)
            return float(d @ (-np.log(qt) - 1.0))

        if slope(t_max) >= 0.0:
            t = t_max
        else:
            a, b = 0.0, t_max
            for _ in range(60):
                mid = 0.5 * (a + b)
                if slope(mid) > 0.0:
                    a = mid
                else:
                    b = mid
            t = 0.5 * (a + b)
        q_new = q + t * d
        h_new = float(-_xlogx(q_new).sum())
        if h_new <= h:
            break
        if t >= t_max:
            w[worst] = 0.0
        else:
            w[worst] -= t
        w[best] += t
        q = q_new
        improved = h_new - h
        h = h_new
        if improved < improve_tol and gap <= 1e-9:
            break
    return h, w, it
