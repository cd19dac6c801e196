"""Minimal dense rectifier network with softmax output.

Everything is plain NumPy: dense affine layers, ReLU hidden activations,
a max-shifted softmax head, and a fused softmax/cross-entropy backward
pass.  Models are immutable value objects after construction; training
code works on mutable parameter lists and freezes at the end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .simplex import ProbVector

# Probabilities are floored at this before the log in the loss.
LOSS_CLAMP = 1e-12


@dataclass(frozen=True, eq=False)
class MlpModel:
    """Dense network parameters; weights[l] has shape (dims[l], dims[l+1])."""

    layer_dims: tuple
    weights: tuple
    biases: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.layer_dims)
        if len(dims) < 2 or any(d <= 0 for d in dims):
            raise ValidationError(f"bad layer dims: {dims}")
        weights = tuple(np.asarray(w, dtype=np.float64) for w in self.weights)
        biases = tuple(np.asarray(b, dtype=np.float64) for b in self.biases)
        if len(weights) != len(dims) - 1 or len(biases) != len(dims) - 1:
            raise ValidationError("parameter count does not match layer dims")
        for layer, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (dims[layer], dims[layer + 1]) or b.shape != (dims[layer + 1],):
                raise ValidationError(
                    f"layer {layer} shape mismatch: W{w.shape} b{b.shape} for dims {dims}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValidationError(f"layer {layer} has non-finite parameters")
        for arr in (*weights, *biases):
            arr.setflags(write=False)
        object.__setattr__(self, "layer_dims", dims)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def n_classes(self) -> int:
        return self.layer_dims[-1]

    @property
    def n_features(self) -> int:
        return self.layer_dims[0]


def init_parameters(layer_dims, rng: np.random.Generator):
    """He-style init: fan-in-scaled Gaussian weights, zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        std = np.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, std, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _stable_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward_batch(weights, biases, x: np.ndarray):
    """Probabilities and per-layer activations for a batch.

    Returns ``(probs, activations)`` where ``activations[0]`` is the
    input and ``activations[l]`` the post-ReLU output of hidden layer l.
    """
    acts = [x]
    h = x
    last = len(weights) - 1
    for layer, (w, b) in enumerate(zip(weights, biases)):
        z = h @ w + b
        if layer == last:
            probs = _stable_softmax(z)
        else:
            h = np.maximum(z, 0.0)
            acts.append(h)
    return probs, acts


def forward(model: MlpModel, x) -> tuple:
    """Single-input forward pass; returns ``(ProbVector, activations)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != model.n_features:
        raise ValidationError(
            f"expected a feature vector of length {model.n_features}, got shape {x.shape}"
        )
    probs, acts = forward_batch(model.weights, model.biases, x[None, :])
    return ProbVector(probs[0]), [a[0] for a in acts]


def predict_proba(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Softmax probabilities for an (n, d) feature matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValidationError(
            f"expected (n, {model.n_features}) features, got shape {x.shape}"
        )
    probs, _ = forward_batch(model.weights, model.biases, x)
    return probs


def ce_loss(p, label: int) -> float:
    """Cross entropy -ln p[label], probability floored at 1e-12."""
    if isinstance(p, ProbVector):
        p = p.components
    p = np.asarray(p, dtype=np.float64)
    if not 0 <= int(label) < p.size:
        raise ValidationError(f"label {label} out of range for C={p.size}")
    return float(-np.log(max(float(p[int(label)]), LOSS_CLAMP)))


def ce_losses(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-sample cross entropies from batch probabilities."""
    picked = probs[np.arange(probs.shape[0]), labels]
    return -np.log(np.maximum(picked, LOSS_CLAMP))


def backward_batch(weights, probs: np.ndarray, acts, labels: np.ndarray):
    """Exact gradient of the mean cross entropy over the batch.

    Uses the fused softmax/cross-entropy output gradient
    ``(p - one_hot) / n`` and ReLU masks from the cached activations.
    Returns ``(weight_grads, bias_grads)``.
    """
    n = probs.shape[0]
    delta = probs.copy()
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    w_grads = [None] * len(weights)
    b_grads = [None] * len(weights)
    for layer in range(len(weights) - 1, -1, -1):
        w_grads[layer] = acts[layer].T @ delta
        b_grads[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (acts[layer] > 0.0)
    return w_grads, b_grads
