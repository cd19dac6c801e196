"""Synthetic 2-D benchmark generators.

Desk-scale stand-ins for the usual image benchmarks: Gaussian blobs on a
circle as the in-distribution task, a far ring or uniform box as
out-of-distribution data (label -1), and interleaved moons.  Every
generator is a pure function of its spec, including the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

KINDS = ("blobs", "ring_ood", "uniform_ood", "two_moons")

# OOD placement relative to the in-distribution geometry.
RING_RADIUS_FACTOR = 3.0
UNIFORM_BOX_SCALE = 1.5


@dataclass(frozen=True)
class DatasetSpec:
    kind: str
    n: int
    classes: int = 2
    radius: float = 1.0
    sigma: float = 0.35
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown dataset kind {self.kind!r}; options: {KINDS}")
        if self.n < 1:
            raise ValidationError("n must be positive")
        if self.kind == "blobs" and not self.n >= self.classes >= 2:
            raise ValidationError("blobs need n >= classes >= 2")
        if self.kind == "two_moons" and self.classes != 2:
            raise ValidationError("two_moons is a binary dataset")
        if self.radius <= 0.0:
            raise ValidationError("radius must be positive")
        if self.sigma <= 0.0:
            raise ValidationError("sigma must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit an unsigned 64-bit integer")


def _balanced_counts(n: int, k: int) -> np.ndarray:
    counts = np.full(k, n // k, dtype=np.int64)
    counts[: n % k] += 1
    return counts


def _blob_means(k: int, radius: float) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(k) / k
    return radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def gen_dataset(spec: DatasetSpec):
    """Features and labels for the spec; OOD kinds carry label -1.

    Returns ``(x, y)`` with ``x`` of shape (n, 2).  Identical specs
    produce identical arrays.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n

    if spec.kind == "blobs":
        counts = _balanced_counts(n, spec.classes)
        means = _blob_means(spec.classes, spec.radius)
        y = np.repeat(np.arange(spec.classes, dtype=np.int64), counts)
        x = means[y] + rng.normal(0.0, spec.sigma, size=(n, 2))
        perm = rng.permutation(n)
        return x[perm], y[perm]

    if spec.kind == "ring_ood":
        theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
        ring = RING_RADIUS_FACTOR * spec.radius
        x = ring * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        x += rng.normal(0.0, spec.sigma, size=(n, 2))
        return x, np.full(n, -1, dtype=np.int64)

    if spec.kind == "uniform_ood":
        half_width = UNIFORM_BOX_SCALE * (spec.radius + 3.0 * spec.sigma)
        x = rng.uniform(-half_width, half_width, size=(n, 2))
        return x, np.full(n, -1, dtype=np.int64)

    # two interleaved half circles
    counts = _balanced_counts(n, 2)
    t0 = rng.uniform(0.0, np.pi, size=counts[0])
    t1 = rng.uniform(0.0, np.pi, size=counts[1])
    upper = np.stack([np.cos(t0), np.sin(t0)], axis=1)
    lower = np.stack([1.0 - np.cos(t1), -np.sin(t1) + 0.5], axis=1)
    x = spec.radius * np.concatenate([upper, lower])
    x += rng.normal(0.0, spec.sigma, size=(n, 2))
    y = np.repeat(np.array([0, 1], dtype=np.int64), counts)
    perm = rng.permutation(n)
    return x[perm], y[perm]
