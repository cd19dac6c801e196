"""Downstream evaluation: detection AUROC, calibration, selective accuracy.

AUROC uses the rank statistic with half-credit ties, which the pair
counting oracle in :mod:`credro.oracles` reproduces exactly.  Accuracy
rejection curves report accuracy in percent on a fixed rate grid, with
accuracy pinned to 100% at full rejection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    UndefinedMetricError,
    UndefinedNormalizationError,
    ValidationError,
)
from .simplex import BoxCredalSet, ProbVector


@dataclass(frozen=True)
class ScoredBinarySample:
    """One detection sample: uncertainty score and 0 (ID) / 1 (OOD) label."""

    score: float
    label: int

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValidationError(f"score must be finite, got {self.score!r}")
        if self.label not in (0, 1):
            raise ValidationError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True, eq=False)
class ArCurve:
    """Accuracy (percent) as a function of the rejection rate."""

    rejection_rates: np.ndarray
    accuracies: np.ndarray
    auc: float
    normalized: bool = False

    def __post_init__(self):
        rates = np.asarray(self.rejection_rates, dtype=np.float64)
        accs = np.asarray(self.accuracies, dtype=np.float64)
        if rates.shape != accs.shape or rates.ndim != 1 or rates.size < 2:
            raise ValidationError("rates and accuracies must be equal-length vectors")
        if np.any(np.diff(rates) <= 0) or rates[0] < 0 or rates[-1] > 1:
            raise ValidationError("rejection rates must ascend within [0, 1]")
        top = 1.0 if self.normalized else 100.0
        if abs(rates[-1] - 1.0) < 1e-12 and abs(accs[-1] - top) > 1e-9:
            raise ValidationError(f"curve must reach {top} at full rejection")
        rates.setflags(write=False)
        accs.setflags(write=False)
        object.__setattr__(self, "rejection_rates", rates)
        object.__setattr__(self, "accuracies", accs)


def _trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    return float(((x[1:] - x[:-1]) * (y[1:] + y[:-1])).sum() / 2.0)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    n = values.size
    run_start = np.empty(n, dtype=bool)
    run_start[0] = True
    run_start[1:] = sorted_vals[1:] != sorted_vals[:-1]
    run_id = np.cumsum(run_start) - 1
    starts = np.flatnonzero(run_start)
    lengths = np.diff(np.append(starts, n))
    averages = starts + (lengths + 1) / 2.0
    ranks = np.empty(n)
    ranks[order] = averages[run_id]
    return ranks


def auroc_scores(scores, labels) -> float:
    """Rank-based AUROC (Mann-Whitney with half-credit ties)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValidationError("scores and labels must be equal-length vectors")
    if not np.all(np.isfinite(scores)):
        raise ValidationError("scores must be finite")
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUROC needs at least one sample of each class")
    ranks = _average_ranks(scores)
    u = float(ranks[labels == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def auroc(samples) -> float:
    """AUROC of scored ID/OOD samples; higher scores mean more OOD."""
    samples = list(samples)
    scores = np.array([s.score for s in samples], dtype=np.float64)
    labels = np.array([s.label for s in samples], dtype=np.int64)
    return auroc_scores(scores, labels)


def ece_arrays(probs: np.ndarray, labels: np.ndarray, bins: int = 10) -> float:
    """Expected calibration error with equal-width confidence bins.

    Confidence is the top predicted probability; interior bins are
    half-open, the last bin right-inclusive; empty bins contribute 0.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] != labels.shape[0] or probs.shape[0] == 0:
        raise ValidationError("need a nonempty (n, C) probability array with n labels")
    if bins < 1:
        raise ValidationError("need at least one bin")
    conf = probs.max(axis=1)
    correct = (probs.argmax(axis=1) == labels).astype(np.float64)
    bin_idx = np.minimum((conf * bins).astype(np.int64), bins - 1)
    n = conf.size
    counts = np.bincount(bin_idx, minlength=bins)
    conf_sums = np.bincount(bin_idx, weights=conf, minlength=bins)
    acc_sums = np.bincount(bin_idx, weights=correct, minlength=bins)
    nonempty = counts > 0
    gaps = np.abs(
        acc_sums[nonempty] / counts[nonempty] - conf_sums[nonempty] / counts[nonempty]
    )
    return float((counts[nonempty] / n * gaps).sum())


def ece(predictions, bins: int = 10) -> float:
    """ECE over (probability vector, true label) pairs."""
    pairs = list(predictions)
    if not pairs:
        raise ValidationError("need at least one prediction")
    probs = np.stack(
        [p.components if isinstance(p, ProbVector) else np.asarray(p) for p, _ in pairs]
    )
    labels = np.array([label for _, label in pairs], dtype=np.int64)
    return ece_arrays(probs, labels, bins)


def accuracy_rejection(eu_scores, correct, step: float = 0.01) -> ArCurve:
    """Accuracy over the retained samples as the rejection rate grows.

    At rate r the ``floor(r * n)`` highest-uncertainty samples are
    rejected (ties keep the earlier index first); accuracy is pinned to
    100% at r = 1.  AUC is the trapezoid over the rate grid.
    """
    eu_scores = np.asarray(eu_scores, dtype=np.float64)
    correct = np.asarray(correct, dtype=bool)
    if eu_scores.shape != correct.shape or eu_scores.ndim != 1 or eu_scores.size == 0:
        raise ValidationError("need equal-length nonempty score and correctness vectors")
    if not np.all(np.isfinite(eu_scores)):
        raise ValidationError("uncertainty scores must be finite")
    n_steps = round(1.0 / step)
    if n_steps < 1 or abs(n_steps * step - 1.0) > 1e-9:
        raise ValidationError(f"step must evenly divide 1, got {step!r}")
    n = eu_scores.size
    order = np.argsort(-eu_scores, kind="stable")
    kept_correct = correct[order].astype(np.float64)
    # suffix sums: total correct among the samples kept at each cut
    suffix = np.concatenate([np.cumsum(kept_correct[::-1])[::-1], [0.0]])
    grid = np.arange(n_steps + 1)
    rates = grid / n_steps
    reject_counts = (grid * n) // n_steps
    kept_counts = n - reject_counts
    accs = np.empty(n_steps + 1)
    nonempty = kept_counts > 0
    accs[nonempty] = 100.0 * suffix[reject_counts[nonempty]] / kept_counts[nonempty]
    accs[~nonempty] = 100.0
    accs[-1] = 100.0
    return ArCurve(rates, accs, _trapezoid(accs, rates))


def normalized_ar(curve: ArCurve) -> ArCurve:
    """Relative accuracy improvement (A(r) - A(0)) / (100% - A(0))."""
    if curve.normalized:
        raise ValidationError("curve is already normalized")
    base = float(curve.accuracies[0])
    if base >= 100.0:
        raise UndefinedNormalizationError(
            "normalization undefined: accuracy without rejection is already 100%"
        )
    values = (curve.accuracies - base) / (100.0 - base)
    return ArCurve(
        curve.rejection_rates,
        values,
        _trapezoid(values, curve.rejection_rates),
        normalized=True,
    )


@dataclass(frozen=True, eq=False)
class PilSummary:
    mean: float
    std: float
    values: np.ndarray


def pil_summary(boxes) -> PilSummary:
    """Population mean/std of per-instance interval lengths, plus raws."""
    boxes = list(boxes)
    if not boxes:
        raise ValidationError("need at least one credal box")
    values = np.array(
        [float(b.widths.mean()) if isinstance(b, BoxCredalSet) else float(b) for b in boxes]
    )
    values.setflags(write=False)
    return PilSummary(float(values.mean()), float(values.std()), values)
