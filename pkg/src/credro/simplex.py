"""Probability-simplex primitives and credal-set constructions.

A prediction for a ``C``-class problem is a point on the probability
simplex.  An ensemble of ``M`` such predictions for one input induces two
credal sets: the box spanned by per-class min/max probability intervals,
and the convex hull of the member vectors.  This module owns the point
and box types; entropy optimization over the sets lives in
:mod:`credro.entropy`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleBoxError, ValidationError

# |sum - 1| accepted without modification.
SUM_TOL = 1e-9
# Violations up to this are repaired by clipping to [0, 1] and dividing by
# the sum (external prediction files carry limited-precision decimals);
# anything worse is rejected.
RENORM_TOL = 1e-6
# Slack for box-membership queries.
CONTAIN_TOL = 1e-12


def _as_float_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def validate_simplex(values, name: str = "probabilities") -> np.ndarray:
    """Validate (and possibly repair) a probability vector.

    Returns a read-only float64 array.  Entries outside [0, 1] or a sum
    away from 1 by more than ``RENORM_TOL`` raise ``ValidationError``;
    smaller defects are repaired by clipping and renormalizing.
    """
    arr = _as_float_vector(values, name)
    if arr.size < 2:
        raise ValidationError(f"{name} needs at least 2 classes, got {arr.size}")
    lo, hi = float(arr.min()), float(arr.max())
    total = float(arr.sum())
    if lo < -RENORM_TOL or hi > 1.0 + RENORM_TOL or abs(total - 1.0) > RENORM_TOL:
        raise ValidationError(
            f"{name} is not a probability vector: min={lo!r} max={hi!r} sum={total!r}"
        )
    if lo < 0.0 or hi > 1.0 or abs(total - 1.0) > SUM_TOL:
        arr = np.clip(arr, 0.0, 1.0)
        arr = arr / arr.sum()
    else:
        arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProbVector:
    """A point on the C-class probability simplex."""

    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "components", validate_simplex(self.components))

    @property
    def n_classes(self) -> int:
        return self.components.size

    def __len__(self) -> int:
        return self.components.size

    def __iter__(self):
        return iter(self.components)


@dataclass(frozen=True, eq=False)
class MemberSet:
    """The M per-member probability vectors predicted for one instance."""

    members: tuple

    def __post_init__(self):
        members = tuple(
            m if isinstance(m, ProbVector) else ProbVector(m) for m in self.members
        )
        if len(members) < 1:
            raise ValidationError("member set must contain at least one member")
        c = members[0].n_classes
        if any(m.n_classes != c for m in members):
            raise ValidationError("all members must share the same class count")
        object.__setattr__(self, "members", members)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def n_classes(self) -> int:
        return self.members[0].n_classes

    def to_array(self) -> np.ndarray:
        """Member probabilities as an (M, C) array."""
        return np.stack([m.components for m in self.members])

    @classmethod
    def from_array(cls, arr) -> "MemberSet":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"expected an (M, C) array, got shape {arr.shape}")
        return cls(tuple(ProbVector(row) for row in arr))


@dataclass(frozen=True, eq=False)
class BoxCredalSet:
    """Per-class probability intervals intersected with the simplex."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _as_float_vector(self.lower, "lower bounds")
        upper = _as_float_vector(self.upper, "upper bounds")
        if lower.size != upper.size:
            raise ValidationError(
                f"bound lengths differ: {lower.size} vs {upper.size}"
            )
        if lower.size < 2:
            raise ValidationError("a credal box needs at least 2 classes")
        if np.any(lower < -CONTAIN_TOL) or np.any(upper > 1.0 + CONTAIN_TOL):
            raise ValidationError("bounds must lie in [0, 1]")
        if np.any(lower > upper + CONTAIN_TOL):
            raise ValidationError("lower bound exceeds upper bound")
        if lower.sum() > 1.0 + SUM_TOL or upper.sum() < 1.0 - SUM_TOL:
            raise InfeasibleBoxError(
                "empty box: need sum(lower) <= 1 <= sum(upper), got "
                f"{lower.sum()!r} and {upper.sum()!r}"
            )
        lower = np.clip(lower, 0.0, 1.0)
        upper = np.clip(upper, 0.0, 1.0)
        np.minimum(lower, upper, out=lower)
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_classes(self) -> int:
        return self.lower.size

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def is_degenerate(self, tol: float = CONTAIN_TOL) -> bool:
        return bool(np.all(self.widths <= tol))


def softmax(logits) -> ProbVector:
    """Numerically stable softmax of a logit vector."""
    z = _as_float_vector(logits, "logits")
    if z.size < 2:
        raise ValidationError("softmax needs at least 2 logits")
    z = z - z.max()
    e = np.exp(z)
    return ProbVector(e / e.sum())


def extract_intervals(ms: MemberSet) -> BoxCredalSet:
    """Class-wise min/max probability intervals over the ensemble members."""
    arr = ms.to_array()
    return BoxCredalSet(arr.min(axis=0), arr.max(axis=0))


def mean_prediction(ms: MemberSet) -> ProbVector:
    """Component-wise arithmetic mean of the member vectors."""
    return ProbVector(ms.to_array().mean(axis=0))


def box_contains(box: BoxCredalSet, p: ProbVector, tol: float = CONTAIN_TOL) -> bool:
    """True iff every coordinate of ``p`` lies within the box bounds."""
    if not isinstance(p, ProbVector):
        p = ProbVector(p)
    if p.n_classes != box.n_classes:
        raise ValidationError(
            f"dimension mismatch: box has {box.n_classes} classes, point has {p.n_classes}"
        )
    c = p.components
    return bool(np.all(c >= box.lower - tol) and np.all(c <= box.upper + tol))
