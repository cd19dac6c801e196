"""Upper and lower Shannon entropy over box and convex-hull credal sets.

The box maximizer is solved exactly by water-filling (all unclamped
coordinates share one level, found by bisection).  The box minimizer is
concave minimization, attained at an extreme point of the polytope; for
C <= ``EXACT_MIN_CLASSES`` every extreme point is enumerated, above that
a multi-start greedy saturation descent is used and the result is
flagged approximate.  The hull maximizer runs conditional gradient over
the mixture-weight simplex; the hull minimizer is simply the worst
member, since entropy is concave in the mixture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import InfeasibleBoxError, ValidationError
from .simplex import SUM_TOL, BoxCredalSet, MemberSet, ProbVector

# Largest class count for which the lower-entropy extreme-point
# enumeration (cost C * 2^(C-1)) is used; beyond it the greedy descent
# takes over.
EXACT_MIN_CLASSES = 14

LN2 = math.log(2.0)


def shannon_entropy(p) -> float:
    """Shannon entropy in nats, with 0 * ln 0 == 0."""
    if isinstance(p, ProbVector):
        p = p.components
    return float(kernels.shannon_entropy(np.ascontiguousarray(p, dtype=np.float64)))


def nats_to_bits(value: float) -> float:
    return value / LN2


@dataclass(frozen=True, eq=False)
class HullWeights:
    """Mixture weights over the M ensemble members."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValidationError("weights must be a non-empty vector")
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights contain non-finite entries")
        if w.min() < -SUM_TOL or abs(w.sum() - 1.0) > SUM_TOL:
            raise ValidationError(
                f"weights must lie on the simplex: min={w.min()!r} sum={w.sum()!r}"
            )
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True, eq=False)
class EntropyOptimum:
    """One entropy bound with its attaining probability vector."""

    value: float
    argument: ProbVector
    exact: bool = True


@dataclass(frozen=True, eq=False)
class EntropyPair:
    """Upper and lower entropy of a credal set, with the attaining points."""

    upper: float
    lower: float
    arg_upper: ProbVector
    arg_lower: ProbVector
    exact: bool = True

    def __post_init__(self):
        c = self.arg_upper.n_classes
        if not (-1e-9 <= self.lower <= self.upper + 1e-9):
            raise ValidationError(
                f"entropy bounds out of order: lower={self.lower!r} upper={self.upper!r}"
            )
        if self.upper > math.log(c) + 1e-9:
            raise ValidationError(f"upper entropy {self.upper!r} exceeds ln({c})")

    @property
    def difference(self) -> float:
        return self.upper - self.lower


def _feasible_bounds(lo, hi) -> tuple[np.ndarray, np.ndarray]:
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    if lo.sum() > 1.0 + SUM_TOL or hi.sum() < 1.0 - SUM_TOL:
        raise InfeasibleBoxError(
            f"no probability vector fits the box: sum(lower)={lo.sum()!r} "
            f"sum(upper)={hi.sum()!r}"
        )
    return lo, hi


def upper_entropy_box(box: BoxCredalSet) -> EntropyOptimum:
    """Exact entropy maximum over the box, via water-filling."""
    lo, hi = _feasible_bounds(box.lower, box.upper)
    h, p = kernels.waterfill_box(lo, hi)
    return EntropyOptimum(float(h), ProbVector(p), exact=True)


def lower_entropy_box(box: BoxCredalSet) -> EntropyOptimum:
    """Entropy minimum over the box.

    Exact extreme-point enumeration up to ``EXACT_MIN_CLASSES`` classes;
    a multi-start greedy saturation descent (flagged approximate) above.
    """
    lo, hi = _feasible_bounds(box.lower, box.upper)
    if box.n_classes <= EXACT_MIN_CLASSES:
        h, p = kernels.box_lower_vertices(lo, hi)
        if p is None:
            raise InfeasibleBoxError("no extreme point found; box is empty")
        return EntropyOptimum(float(h), ProbVector(p), exact=True)
    h, p = _greedy_lower(lo, hi)
    return EntropyOptimum(float(h), ProbVector(p), exact=False)


def upper_entropy_hull(ms: MemberSet, max_iter: int = 10000) -> tuple:
    """Entropy maximum over the convex hull of the members.

    Conditional-gradient ascent over the mixture weights with exact line
    search; uniform initialization.  Returns ``(value, HullWeights)``.
    """
    arr = ms.to_array()
    h, w, _ = kernels.hull_upper_cg(arr, 1e-10, max_iter)
    return float(h), HullWeights(w)


def lower_entropy_hull(ms: MemberSet) -> tuple:
    """Entropy minimum over the convex hull: the worst single member.

    Returns ``(value, member_index)``; ties break to the lowest index.
    """
    ents = kernels.entropy_rows(ms.to_array())
    idx = int(np.argmin(ents))
    return float(ents[idx]), idx


def box_entropy_pair(box: BoxCredalSet) -> EntropyPair:
    up = upper_entropy_box(box)
    lo = lower_entropy_box(box)
    return EntropyPair(
        upper=up.value,
        lower=lo.value,
        arg_upper=up.argument,
        arg_lower=lo.argument,
        exact=up.exact and lo.exact,
    )


def hull_entropy_pair(ms: MemberSet) -> EntropyPair:
    h_up, weights = upper_entropy_hull(ms)
    mix = weights.weights @ ms.to_array()
    h_lo, idx = lower_entropy_hull(ms)
    return EntropyPair(
        upper=h_up,
        lower=h_lo,
        arg_upper=ProbVector(mix),
        arg_lower=ms.members[idx],
    )


def _xlogx(x: float) -> float:
    return x * math.log(x) if x > 0.0 else 0.0


def _favoring_start(lo, hi, favored: int) -> np.ndarray:
    """Feasible point pushing one class toward its upper bound."""
    p = lo.copy()
    spare = 1.0 - p.sum()
    give = min(spare, hi[favored] - lo[favored])
    p[favored] += give
    spare -= give
    if spare > 0.0:
        # widest coordinates soak up the remainder, deterministically
        order = sorted(range(len(lo)), key=lambda k: (-(hi[k] - lo[k]), k))
        for k in order:
            if spare <= 0.0:
                break
            give = min(spare, hi[k] - p[k])
            p[k] += give
            spare -= give
    return p


def _saturating_descent(lo, hi, p: np.ndarray, max_moves: int = None) -> np.ndarray:
    """Greedy entropy descent by full-saturation pair transfers.

    Repeatedly moves all transferable mass between the coordinate pair
    giving the steepest entropy drop; terminates at an extreme point
    (entropy restricted to any pair direction is strictly concave, so
    some saturating move improves whenever two coordinates are free).
    """
    c = len(lo)
    if max_moves is None:
        max_moves = 10 * c * c
    p = p.copy()
    for _ in range(max_moves):
        # gain = old entropy - new entropy for a full transfer j -> k
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


def _greedy_lower(lo, hi) -> tuple:
    """Approximate box entropy minimum for large class counts."""
    best_h = np.inf
    best_p = None
    for favored in range(len(lo)):
        p = _saturating_descent(lo, hi, _favoring_start(lo, hi, favored))
        h = float(kernels.shannon_entropy(p))
        if h < best_h:
            best_h = h
            best_p = p
    return best_h, best_p
