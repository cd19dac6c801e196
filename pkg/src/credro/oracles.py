"""Independent brute-force oracles used to check the production solvers.

Nothing here shares code with the solvers under test: the entropy
oracles enumerate lattice points and hill-climb with pairwise mass
transfers, the AUROC oracle counts pairs, and the hull oracle scans a
dense grid over the mixture-weight simplex.  The `oracle-check` CLI
subcommand and the test suite drive these.
"""

from __future__ import annotations

import math

import numpy as np

from .entropy import EntropyPair
from .errors import (
    UndefinedMetricError,
    UnsupportedDimensionError,
    ValidationError,
)
from .simplex import BoxCredalSet, ProbVector


def _xlogx(x: float) -> float:
    return x * math.log(x) if x > 0.0 else 0.0


def _xlogx_arr(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    m = x > 0.0
    out[m] = x[m] * np.log(x[m])
    return out


def _entropy(p: np.ndarray) -> float:
    return float(-_xlogx_arr(p).sum())


def _lattice_steps(step: float) -> int:
    if not (0.0 < step <= 0.1):
        raise ValidationError(f"step must lie in (0, 0.1], got {step!r}")
    n = round(1.0 / step)
    if abs(n * step - 1.0) > 1e-9:
        raise ValidationError(f"step must evenly divide 1, got {step!r}")
    return n


def _index_windows(lo: np.ndarray, hi: np.ndarray, step: float, n: int):
    a = np.ceil((lo - 1e-12) / step).astype(np.int64)
    b = np.floor((hi + 1e-12) / step).astype(np.int64)
    a = np.maximum(a, 0)
    b = np.minimum(b, n)
    return a, b


class _LatticeOptima:
    __slots__ = ("min_idx", "max_idx", "h_max", "h_min")

    def __init__(self, min_idx, max_idx, h_max, h_min):
        # min_idx attains the entropy maximum (it minimizes sum of x ln x)
        self.min_idx = min_idx
        self.max_idx = max_idx
        self.h_max = h_max
        self.h_min = h_min


def _scan_lattice(lo: np.ndarray, hi: np.ndarray, step: float) -> _LatticeOptima:
    """Exhaustive entropy extrema over lattice points inside box and simplex.

    Coordinates are multiples of ``step``; the last one is determined by
    the unit sum.  Raises ``ValidationError`` when no lattice point is
    feasible.  The four-class case avoids materializing the full 3-D
    grid by reducing the middle coordinate pair to their index sum
    (the entropy table contribution of the pair depends on the pair only
    through its members, and per-sum extrema cover every combination).
    """
    c = lo.size
    n = _lattice_steps(step)
    a, b = _index_windows(lo, hi, step, n)
    if np.any(a > b):
        raise ValidationError("no lattice point satisfies the box bounds")
    t = _xlogx_arr(np.arange(n + 1, dtype=np.float64) * step)

    if c == 2:
        i_lo = max(a[0], n - b[1])
        i_hi = min(b[0], n - a[1])
        if i_lo > i_hi:
            raise ValidationError("no lattice point satisfies the simplex constraint")
        i = np.arange(i_lo, i_hi + 1)
        s = t[i] + t[n - i]
        j_min, j_max = int(np.argmin(s)), int(np.argmax(s))
        mk = lambda j: np.array([i[j], n - i[j]], dtype=np.int64)
        return _LatticeOptima(mk(j_min), mk(j_max), -s[j_min], -s[j_max])

    if c == 3:
        i0 = np.arange(a[0], b[0] + 1)
        i1 = np.arange(a[1], b[1] + 1)
        i2 = n - i0[:, None] - i1[None, :]
        ok = (i2 >= a[2]) & (i2 <= b[2])
        if not ok.any():
            raise ValidationError("no lattice point satisfies the simplex constraint")
        s = t[i0][:, None] + t[i1][None, :] + t[np.clip(i2, 0, n)]
        s_min = np.where(ok, s, np.inf)
        s_max = np.where(ok, s, -np.inf)
        jm = np.unravel_index(int(np.argmin(s_min)), s.shape)
        jx = np.unravel_index(int(np.argmax(s_max)), s.shape)
        mk = lambda j: np.array(
            [i0[j[0]], i1[j[1]], n - i0[j[0]] - i1[j[1]]], dtype=np.int64
        )
        return _LatticeOptima(mk(jm), mk(jx), -s_min[jm], -s_max[jx])

    if c == 4:
        # reduce (i1, i2) to their sum: per-sum extrema of t[i1] + t[i2]
        s_lo, s_hi = int(a[1] + a[2]), int(b[1] + b[2])
        sums = np.arange(s_lo, s_hi + 1)
        g_min = np.full(sums.size, np.inf)
        g_max = np.full(sums.size, -np.inf)
        g_argmin = np.zeros(sums.size, dtype=np.int64)
        g_argmax = np.zeros(sums.size, dtype=np.int64)
        for idx, s_val in enumerate(sums):
            w_lo = max(a[1], s_val - b[2])
            w_hi = min(b[1], s_val - a[2])
            if w_lo > w_hi:
                continue
            i1 = np.arange(w_lo, w_hi + 1)
            vals = t[i1] + t[s_val - i1]
            k_min, k_max = int(np.argmin(vals)), int(np.argmax(vals))
            g_min[idx] = vals[k_min]
            g_max[idx] = vals[k_max]
            g_argmin[idx] = i1[k_min]
            g_argmax[idx] = i1[k_max]
        i0 = np.arange(a[0], b[0] + 1)
        i3 = n - i0[:, None] - sums[None, :]
        ok = (i3 >= a[3]) & (i3 <= b[3])
        t3 = t[np.clip(i3, 0, n)]
        base = t[i0][:, None] + t3
        s_min_plane = np.where(ok & np.isfinite(g_min)[None, :], base + g_min, np.inf)
        s_max_plane = np.where(ok & np.isfinite(g_max)[None, :], base + g_max, -np.inf)
        if not np.isfinite(s_min_plane).any():
            raise ValidationError("no lattice point satisfies the simplex constraint")
        jm = np.unravel_index(int(np.argmin(s_min_plane)), s_min_plane.shape)
        jx = np.unravel_index(int(np.argmax(s_max_plane)), s_max_plane.shape)

        def mk(j, g_arg):
            first, s_val = int(i0[j[0]]), int(sums[j[1]])
            one = int(g_arg[j[1]])
            return np.array(
                [first, one, s_val - one, n - first - s_val], dtype=np.int64
            )

        return _LatticeOptima(
            mk(jm, g_argmin), mk(jx, g_argmax), -s_min_plane[jm], -s_max_plane[jx]
        )

    raise UnsupportedDimensionError(f"lattice oracle supports C <= 4, got C={c}")


def grid_oracle_entropy(box: BoxCredalSet, step: float) -> EntropyPair:
    """Lattice-scan entropy extrema over the box; accuracy O(step).

    Testing aid only: C is capped at 4 and callers normally follow up
    with :func:`polish_entropy_pair` to sharpen the lattice optimum.
    """
    if box.n_classes > 4:
        raise UnsupportedDimensionError(
            f"lattice oracle supports C <= 4, got C={box.n_classes}"
        )
    opt = _scan_lattice(box.lower, box.upper, step)
    n = _lattice_steps(step)
    return EntropyPair(
        upper=opt.h_max,
        lower=opt.h_min,
        arg_upper=ProbVector(opt.min_idx.astype(np.float64) / n),
        arg_lower=ProbVector(opt.max_idx.astype(np.float64) / n),
        exact=False,
    )


def feasible_point(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """A box point with unit sum, by bisecting the interpolation weight."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    a, b = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (a + b)
        if (lo + mid * (hi - lo)).sum() < 1.0:
            a = mid
        else:
            b = mid
    return lo + 0.5 * (a + b) * (hi - lo)


def pair_transfer_ascent(
    lo: np.ndarray,
    hi: np.ndarray,
    p: np.ndarray,
    eps0: float = 0.25,
    eps_min: float = 1e-12,
) -> np.ndarray:
    """Greedy entropy ascent by bounded pair transfers with shrinking step.

    From any feasible point this converges to the box entropy maximum:
    the objective is strictly concave and pair transfers span the
    feasible directions of the unit-sum constraint.
    """
    c = len(lo)
    p = p.copy()
    eps = eps0
    while eps >= eps_min:
        for _ in range(200):
            best_gain = 1e-18
            best = None
            for j in range(c):
                room_j = p[j] - lo[j]
                if room_j <= 0.0:
                    continue
                for k in range(c):
                    if k == j:
                        continue
                    amount = min(eps, room_j, hi[k] - p[k])
                    if amount <= 0.0:
                        continue
                    gain = (
                        _xlogx(p[j])
                        + _xlogx(p[k])
                        - _xlogx(p[j] - amount)
                        - _xlogx(p[k] + amount)
                    )
                    if gain > best_gain:
                        best_gain = gain
                        best = (j, k, amount)
            if best is None:
                break
            j, k, amount = best
            p[j] -= amount
            p[k] += amount
        eps *= 0.5
    return p


def saturating_min_descent(
    lo: np.ndarray, hi: np.ndarray, p: np.ndarray, max_moves: int = None
) -> np.ndarray:
    """Greedy entropy descent by full-saturation pair transfers.

    Lands exactly on an extreme point: while two coordinates are strictly
    inside their bounds, the strictly concave 1-D restriction guarantees
    a saturating transfer that lowers entropy.
    """
    c = len(lo)
    if max_moves is None:
        max_moves = 10 * c * c
    p = p.copy()
    for _ in range(max_moves):
        best_gain = 1e-15
        best = None
        for j in range(c):
            room_j = p[j] - lo[j]
            if room_j <= 1e-15:
                continue
            for k in range(c):
                if k == j:
                    continue
                amount = min(room_j, hi[k] - p[k])
                if amount <= 1e-15:
                    continue
                gain = (
                    _xlogx(p[j] - amount)
                    + _xlogx(p[k] + amount)
                    - _xlogx(p[j])
                    - _xlogx(p[k])
                )
                if gain > best_gain:
                    best_gain = gain
                    best = (j, k, amount)
        if best is None:
            break
        j, k, amount = best
        if amount >= p[j] - lo[j]:
            p[k] += p[j] - lo[j]
            p[j] = lo[j]
        else:
            p[j] -= amount
            p[k] = hi[k]
    return p


def _coarse_min_candidates(
    lo: np.ndarray,
    hi: np.ndarray,
    step: float,
    margin: float = 0.3,
    separation: int = 3,
    cap: int = 64,
) -> list:
    """Spread near-minimal lattice points from a coarse full enumeration.

    Seeds the descent in every basin that could contain the true
    minimum: concave minima sit at extreme points, and distinct extreme
    points show up as separated near-minimal lattice clusters.
    """
    c = lo.size
    n = _lattice_steps(step)
    a, b = _index_windows(lo, hi, step, n)
    if np.any(a > b):
        return []
    t = _xlogx_arr(np.arange(n + 1, dtype=np.float64) * step)
    axes = [np.arange(a[k], b[k] + 1) for k in range(c - 1)]
    grids = np.meshgrid(*axes, indexing="ij", sparse=True)
    last = n - sum(grids)
    ok = (last >= a[c - 1]) & (last <= b[c - 1])
    if not ok.any():
        return []
    s = sum(t[g] for g in grids) + t[np.clip(last, 0, n)]
    s = np.where(ok, s, -np.inf)
    flat = s.ravel()
    order = np.argsort(-flat, kind="stable")[: min(flat.size, 4096)]
    s_best = flat[order[0]]
    kept = []
    shape = s.shape
    for pos in order:
        val = flat[pos]
        if not np.isfinite(val) or val < s_best - margin:
            break
        idx = np.unravel_index(int(pos), shape)
        point = np.array(
            [axes[k][idx[k]] for k in range(c - 1)]
            + [n - sum(axes[k][idx[k]] for k in range(c - 1))],
            dtype=np.int64,
        )
        if all(np.max(np.abs(point - q)) >= separation for q in kept):
            kept.append(point)
            if len(kept) >= cap:
                break
    return [pt.astype(np.float64) * step for pt in kept]


def polish_entropy_pair(
    box: BoxCredalSet, step: float = 1e-3, coarse_step: float = 0.01
) -> EntropyPair:
    """Lattice scan plus local polish; the criterion-grade entropy oracle.

    The maximum is polished from the best fine-lattice point (unique
    basin).  The minimum descends from the best fine-lattice point and
    from spread near-minimal coarse candidates, covering competing
    extreme points whose values the lattice cannot separate.
    """
    if box.n_classes > 4:
        raise UnsupportedDimensionError(
            f"lattice oracle supports C <= 4, got C={box.n_classes}"
        )
    lo, hi = box.lower, box.upper
    try:
        opt = _scan_lattice(lo, hi, step)
        n = _lattice_steps(step)
        up_start = opt.min_idx.astype(np.float64) * step
        min_starts = [opt.max_idx.astype(np.float64) * step]
    except ValidationError:
        up_start = feasible_point(lo, hi)
        min_starts = [up_start]
    min_starts.extend(_coarse_min_candidates(lo, hi, coarse_step))

    p_up = pair_transfer_ascent(lo, hi, np.clip(up_start, lo, hi))
    h_up = _entropy(p_up)

    h_lo, p_lo = np.inf, None
    for start in min_starts:
        cand = saturating_min_descent(lo, hi, np.clip(start, lo, hi))
        h = _entropy(cand)
        if h < h_lo:
            h_lo, p_lo = h, cand
    return EntropyPair(
        upper=h_up,
        lower=h_lo,
        arg_upper=ProbVector(p_up),
        arg_lower=ProbVector(p_lo),
        exact=False,
    )


def random_restart_lower(
    box: BoxCredalSet, n_starts: int = 50, seed: int = 0
) -> tuple:
    """Multi-start random descent for the box entropy minimum.

    Oracle for the extreme-point enumeration at moderate class counts.
    Returns ``(entropy, argmin)``.
    """
    rng = np.random.default_rng(seed)
    lo, hi = box.lower, box.upper
    widths = hi - lo
    spare = 1.0 - lo.sum()
    best_h, best_p = np.inf, None
    for _ in range(n_starts):
        z = None
        for _ in range(50):
            cand = rng.random(lo.size)
            denom = float((cand * widths).sum())
            if denom <= 0.0:
                break
            lam = spare / denom
            if lam * cand.max() <= 1.0:
                z = cand * lam
                break
        if z is None:
            z = np.full(lo.size, 0.0 if spare <= 0.0 else spare / max(widths.sum(), 1e-300))
        p = saturating_min_descent(lo, hi, lo + z * widths)
        h = _entropy(p)
        if h < best_h:
            best_h, best_p = h, p
    return best_h, best_p


def auroc_pair_count(scores, labels) -> float:
    """O(n^2) pair-counting AUROC with half-credit ties."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise UndefinedMetricError("AUROC needs at least one sample of each class")
    greater = float((pos[:, None] > neg[None, :]).sum())
    ties = float((pos[:, None] == neg[None, :]).sum())
    return (greater + 0.5 * ties) / (pos.size * neg.size)


def hull_weight_grid(members: np.ndarray, step: float = 1e-3) -> tuple:
    """Dense grid search for the hull entropy maximum; M <= 3 only.

    Returns ``(entropy, weights)`` over mixture weights in multiples of
    ``step``.
    """
    members = np.asarray(members, dtype=np.float64)
    m = members.shape[0]
    n = _lattice_steps(step)
    if m == 1:
        return _entropy(members[0]), np.array([1.0])
    if m == 2:
        w = np.arange(n + 1, dtype=np.float64) / n
        q = w[:, None] * members[0] + (1.0 - w)[:, None] * members[1]
        h = -_xlogx_arr(q).sum(axis=1)
        j = int(np.argmax(h))
        return float(h[j]), np.array([w[j], 1.0 - w[j]])
    if m == 3:
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        mask = i + j <= n
        wi = i[mask] / n
        wj = j[mask] / n
        wk = 1.0 - wi - wj
        q = wi[:, None] * members[0] + wj[:, None] * members[1] + wk[:, None] * members[2]
        h = -_xlogx_arr(q).sum(axis=1)
        best = int(np.argmax(h))
        return float(h[best]), np.array([wi[best], wj[best], wk[best]])
    raise UnsupportedDimensionError(f"weight grid oracle supports M <= 3, got M={m}")
