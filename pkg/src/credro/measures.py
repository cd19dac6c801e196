"""Scalar uncertainty measures computed from ensembles and credal sets.

The ensemble decomposition splits total predictive entropy into the mean
member entropy (aleatoric) and the Jensen gap (epistemic).  Credal-set
measures are the upper-minus-lower entropy difference, the binary
interval width, and the averaged probability interval length (PIL).
Batch variants operate on (N, M, C) prediction arrays and are what the
CLI pipeline calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .entropy import EXACT_MIN_CLASSES, _greedy_lower
from .errors import UnsupportedDimensionError, ValidationError
from .simplex import BoxCredalSet, MemberSet, extract_intervals

MEASURE_NAMES = ("entropy-diff-box", "entropy-diff-hull", "mi", "width", "pil")


@dataclass(frozen=True, eq=False)
class UncertaintyBreakdown:
    """Entropy decomposition: total = aleatoric + epistemic."""

    total: float
    aleatoric: float
    epistemic: float

    def __post_init__(self):
        if abs(self.total - (self.aleatoric + self.epistemic)) > 1e-9:
            raise ValidationError("decomposition does not add up")
        if self.epistemic < -1e-9:
            raise ValidationError(f"negative epistemic term: {self.epistemic!r}")
        if self.total < -1e-9:
            raise ValidationError(f"negative total entropy: {self.total!r}")


def mi_decomposition(ms: MemberSet) -> UncertaintyBreakdown:
    """Ensemble mutual-information decomposition.

    Total is the entropy of the averaged prediction, aleatoric the mean
    member entropy, epistemic their difference (nonnegative by Jensen).
    """
    arr = ms.to_array()
    total = float(kernels.shannon_entropy(np.ascontiguousarray(arr.mean(axis=0))))
    aleatoric = float(kernels.entropy_rows(arr).mean())
    return UncertaintyBreakdown(
        total=total, aleatoric=aleatoric, epistemic=total - aleatoric
    )


def entropy_difference_eu(box: BoxCredalSet) -> float:
    """Upper minus lower entropy of the box credal set (nats, >= 0)."""
    from .entropy import lower_entropy_box, upper_entropy_box

    return upper_entropy_box(box).value - lower_entropy_box(box).value


def interval_width_eu(box: BoxCredalSet) -> float:
    """Binary-classification probability-interval width."""
    if box.n_classes != 2:
        raise UnsupportedDimensionError(
            f"interval width is a binary measure, got C={box.n_classes}"
        )
    return float(box.upper[0] - box.lower[0])


def pil(box: BoxCredalSet) -> float:
    """Averaged probability interval length, mean of per-class widths."""
    return float(box.widths.mean())


# ---------------------------------------------------------------------------
# batch paths over (N, M, C) prediction arrays


def _bounds(probs: np.ndarray):
    return probs.min(axis=1), probs.max(axis=1)


def batch_mi_epistemic(probs: np.ndarray) -> np.ndarray:
    """Epistemic term of the decomposition for every instance."""
    total = kernels.entropy_rows(np.ascontiguousarray(probs.mean(axis=1)))
    n, m, c = probs.shape
    member_h = kernels.entropy_rows(
        np.ascontiguousarray(probs.reshape(n * m, c))
    ).reshape(n, m)
    return np.asarray(total) - member_h.mean(axis=1)


def batch_entropy_difference_box(probs: np.ndarray) -> np.ndarray:
    """Box entropy difference for every instance."""
    lo, hi = _bounds(probs)
    n, _, c = probs.shape
    out = np.empty(n)
    exact = c <= EXACT_MIN_CLASSES
    for i in range(n):
        h_up, _ = kernels.waterfill_box(lo[i], hi[i])
        if exact:
            h_lo, _ = kernels.box_lower_vertices(lo[i], hi[i])
        else:
            h_lo, _ = _greedy_lower(lo[i], hi[i])
        out[i] = h_up - h_lo
    return out


def batch_entropy_difference_hull(probs: np.ndarray) -> np.ndarray:
    """Hull entropy difference for every instance."""
    n, m, c = probs.shape
    member_h = kernels.entropy_rows(
        np.ascontiguousarray(probs.reshape(n * m, c))
    ).reshape(n, m)
    lo_h = member_h.min(axis=1)
    out = np.empty(n)
    for i in range(n):
        h_up, _, _ = kernels.hull_upper_cg(np.ascontiguousarray(probs[i]), 1e-10, 10000)
        out[i] = h_up - lo_h[i]
    return out


def batch_interval_width(probs: np.ndarray) -> np.ndarray:
    if probs.shape[2] != 2:
        raise UnsupportedDimensionError(
            f"interval width is a binary measure, got C={probs.shape[2]}"
        )
    lo, hi = _bounds(probs)
    return hi[:, 0] - lo[:, 0]


def batch_pil(probs: np.ndarray) -> np.ndarray:
    lo, hi = _bounds(probs)
    return (hi - lo).mean(axis=1)


def batch_measure(probs: np.ndarray, set_kind: str, measure: str) -> np.ndarray:
    """Dispatch an uncertainty measure over an (N, M, C) prediction array.

    ``measure='auto'`` resolves to the interval width for binary
    problems and the entropy difference otherwise.
    """
    c = probs.shape[2]
    if measure == "auto":
        measure = "width" if c == 2 else "entropy-diff"
    if measure == "mi":
        return batch_mi_epistemic(probs)
    if measure == "width":
        return batch_interval_width(probs)
    if measure == "pil":
        return batch_pil(probs)
    if measure == "entropy-diff":
        if set_kind == "box":
            return batch_entropy_difference_box(probs)
        if set_kind == "hull":
            return batch_entropy_difference_hull(probs)
        raise ValidationError(f"unknown credal set kind: {set_kind!r}")
    raise ValidationError(f"unknown measure: {measure!r}")


def measure_column_name(set_kind: str, measure: str, n_classes: int) -> str:
    """Canonical measure label written to uncertainty CSV files."""
    if measure == "auto":
        measure = "width" if n_classes == 2 else "entropy-diff"
    if measure == "entropy-diff":
        return f"entropy-diff-{set_kind}"
    return measure


def box_from_predictions(probs_for_instance: np.ndarray) -> BoxCredalSet:
    """Interval extraction straight from an (M, C) member-probability block."""
    return extract_intervals(MemberSet.from_array(probs_for_instance))
