"""Ensemble training under batch-wise worst-case sample reweighting.

Each ensemble member minimizes the mean cross entropy over only the
highest-loss fraction ``delta_i`` of every batch; the fractions
interpolate uniformly from a global pessimism knob ``delta_g`` up to 1,
so the last member is plain ERM and the first trains under the assumed
worst case.  A separate plain-ERM trainer provides the classical
deep-ensemble baseline; with all fractions forced to 1 the reweighted
trainer reproduces it bit for bit under equal seeds.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import TrainingError, ValidationError
from .mlp import (
    MlpModel,
    backward_batch,
    ce_losses,
    forward_batch,
    init_parameters,
    predict_proba,
)
from .simplex import MemberSet, ProbVector

DEFAULT_HIDDEN = (64, 64)


@dataclass(frozen=True)
class TrainConfig:
    delta_g: float = 0.5
    ensemble_size: int = 5
    batch_size: int = 128
    epochs: int = 50
    learning_rate: float = 0.05
    momentum: float = 0.9
    seed: int = 0
    layer_dims: tuple = None
    shuffle: bool = True

    def __post_init__(self):
        if not 0.5 <= self.delta_g <= 1.0:
            raise ValidationError(f"delta_g must lie in [0.5, 1], got {self.delta_g!r}")
        for name in ("ensemble_size", "batch_size", "epochs"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be positive")
        if self.learning_rate <= 0.0:
            raise ValidationError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValidationError(f"momentum must lie in [0, 1), got {self.momentum!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit an unsigned 64-bit integer")
        if self.layer_dims is not None:
            dims = tuple(int(d) for d in self.layer_dims)
            if len(dims) < 2 or any(d <= 0 for d in dims):
                raise ValidationError(f"bad layer dims: {dims}")
            object.__setattr__(self, "layer_dims", dims)

    def resolved_dims(self, n_features: int, n_classes: int) -> tuple:
        """Layer dims to train with, inferring hidden defaults from data."""
        if self.layer_dims is None:
            return (n_features, *DEFAULT_HIDDEN, n_classes)
        dims = self.layer_dims
        if dims[0] != n_features or dims[-1] != n_classes:
            raise ValidationError(
                f"layer_dims {dims} do not match data with {n_features} features "
                f"and {n_classes} classes"
            )
        return dims


@dataclass(frozen=True, eq=False)
class EnsembleArtifact:
    """Trained members with their loss fractions and training metadata."""

    members: tuple
    deltas: tuple
    config: TrainConfig
    loss_traces: tuple = field(default=())

    def __post_init__(self):
        deltas = tuple(float(d) for d in self.deltas)
        if len(deltas) != len(self.members):
            raise ValidationError("one delta per member required")
        if any(b < a for a, b in zip(deltas, deltas[1:])):
            raise ValidationError("deltas must be nondecreasing")
        object.__setattr__(self, "deltas", deltas)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def n_classes(self) -> int:
        return self.members[0].n_classes


def delta_schedule(delta_g, m: int):
    """Per-member loss fractions: uniform interpolation from delta_g to 1.

    Works with floats or ``fractions.Fraction`` alike.  A single-member
    ensemble keeps delta_g (the interpolation is undefined at M=1).
    """
    if not 0.5 <= delta_g <= 1.0:
        raise ValidationError(f"delta_g must lie in [0.5, 1], got {delta_g!r}")
    if m < 1:
        raise ValidationError(f"ensemble size must be positive, got {m}")
    if m == 1:
        return [delta_g]
    return [delta_g + (1 - delta_g) * i / (m - 1) for i in range(m)]


def selection_count(delta_i, batch_len: int) -> int:
    """Number of samples kept for backpropagation: max(1, floor(delta * n))."""
    return max(1, math.floor(delta_i * batch_len))


def select_top_delta(losses, delta_i) -> np.ndarray:
    """Indices of the highest-loss samples, in descending loss order.

    Keeps ``max(1, floor(delta_i * len(losses)))`` samples; ties break
    toward the smaller original index, making the selection deterministic
    regardless of sort internals.
    """
    losses = np.asarray(losses, dtype=np.float64)
    if losses.size == 0:
        raise ValidationError("cannot select from an empty batch")
    if not np.all(np.isfinite(losses)):
        raise ValidationError("losses must be finite")
    if not 0.0 < delta_i <= 1.0:
        raise ValidationError(f"delta must lie in (0, 1], got {delta_i!r}")
    order = np.argsort(-losses, kind="stable")
    return order[: selection_count(delta_i, losses.size)]


def _check_training_data(x: np.ndarray, y: np.ndarray):
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValidationError(
            f"expected (n, d) features with (n,) labels, got {x.shape} and {y.shape}"
        )
    if x.shape[0] == 0:
        raise ValidationError("training data is empty")
    if y.min() < 0:
        raise ValidationError("labels must be nonnegative class indices")


def _sgd_epochs(x, y, dims, rng, config, delta_i):
    """Shared training loop; ``delta_i=None`` runs plain ERM."""
    weights, biases = init_parameters(dims, rng)
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    n = x.shape[0]
    lr, mu = config.learning_rate, config.momentum
    trace = []
    for epoch in range(config.epochs):
        idx = rng.permutation(n) if config.shuffle else np.arange(n)
        for start in range(0, n, config.batch_size):
            rows = idx[start : start + config.batch_size]
            xb, yb = x[rows], y[rows]
            probs, acts = forward_batch(weights, biases, xb)
            losses = ce_losses(probs, yb)
            if not np.all(np.isfinite(losses)):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}"
                )
            if delta_i is None:
                batch_loss = float(losses.mean())
            else:
                keep = np.sort(select_top_delta(losses, delta_i))
                probs = probs[keep]
                acts = [a[keep] for a in acts]
                yb = yb[keep]
                batch_loss = float(losses[keep].mean())
            trace.append(batch_loss)
            w_grads, b_grads = backward_batch(weights, probs, acts, yb)
            for layer in range(len(weights)):
                vel_w[layer] = mu * vel_w[layer] + w_grads[layer]
                vel_b[layer] = mu * vel_b[layer] + b_grads[layer]
                weights[layer] = weights[layer] - lr * vel_w[layer]
                biases[layer] = biases[layer] - lr * vel_b[layer]
    return MlpModel(dims, tuple(weights), tuple(biases)), tuple(trace)


def train_member(x, y, delta_i: float, member_seed: int, config: TrainConfig):
    """Train one member keeping only the top-``delta_i`` loss fraction
    of each batch.  Deterministic given ``member_seed``.  Returns
    ``(model, loss_trace)``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _check_training_data(x, y)
    if not 0.0 < delta_i <= 1.0:
        raise ValidationError(f"delta must lie in (0, 1], got {delta_i!r}")
    dims = config.resolved_dims(x.shape[1], int(y.max()) + 1)
    rng = np.random.default_rng(member_seed)
    return _sgd_epochs(x, y, dims, rng, config, delta_i)


def train_erm_member(x, y, member_seed: int, config: TrainConfig):
    """Plain ERM member: mean cross entropy over the whole batch."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _check_training_data(x, y)
    dims = config.resolved_dims(x.shape[1], int(y.max()) + 1)
    rng = np.random.default_rng(member_seed)
    return _sgd_epochs(x, y, dims, rng, config, None)


def _train_many(worker, m: int, workers: int):
    if workers <= 1:
        results = [worker(i) for i in range(m)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, range(m)))
    return results


def train_ensemble(config: TrainConfig, x, y, workers: int = 1) -> EnsembleArtifact:
    """Train the full reweighted ensemble.

    Member ``i`` uses loss fraction ``delta_schedule(...)[i]`` and a
    private RNG stream seeded ``config.seed + i``, so results do not
    depend on the worker count.
    """
    deltas = [float(d) for d in delta_schedule(config.delta_g, config.ensemble_size)]
    results = _train_many(
        lambda i: train_member(x, y, deltas[i], config.seed + i, config),
        config.ensemble_size,
        workers,
    )
    return EnsembleArtifact(
        members=tuple(r[0] for r in results),
        deltas=tuple(deltas),
        config=config,
        loss_traces=tuple(r[1] for r in results),
    )


def train_deep_ensemble(config: TrainConfig, x, y, workers: int = 1) -> EnsembleArtifact:
    """Classical deep-ensemble baseline: every member is plain ERM."""
    results = _train_many(
        lambda i: train_erm_member(x, y, config.seed + i, config),
        config.ensemble_size,
        workers,
    )
    erm_config = replace(config, delta_g=1.0)
    return EnsembleArtifact(
        members=tuple(r[0] for r in results),
        deltas=(1.0,) * config.ensemble_size,
        config=erm_config,
        loss_traces=tuple(r[1] for r in results),
    )


def predict_members(artifact: EnsembleArtifact, x: np.ndarray) -> np.ndarray:
    """Member probabilities for an (n, d) feature matrix as (n, M, C)."""
    stacked = np.stack([predict_proba(m, x) for m in artifact.members], axis=1)
    return stacked


def predict_ensemble(artifact: EnsembleArtifact, x) -> MemberSet:
    """All member predictions for a single input, in member order."""
    x = np.asarray(x, dtype=np.float64)
    probs = predict_members(artifact, x[None, :])[0]
    return MemberSet(tuple(ProbVector(row) for row in probs))
