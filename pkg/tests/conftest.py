import numpy as np
import pytest


def random_members(rng, m: int, c: int, spread: float = 1.5) -> np.ndarray:
    """Softmax of Gaussian logits: realistic ensemble member probabilities."""
    logits = rng.normal(0.0, spread, size=(m, c))
    z = np.exp(logits - logits.max(axis=1, keepdims=True))
    return z / z.sum(axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
