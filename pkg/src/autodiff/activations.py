"""Elementwise activation functions and their derivatives."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from tensor import Matrix

LRELU_SLOPE = 0.2


@dataclass(frozen=True)
class Activation:
    name: str
    fn: Callable[[Matrix], Matrix]
    derivative: Callable[[Matrix], Matrix]


def _lrelu(x: Matrix) -> Matrix:
    return np.maximum(x, LRELU_SLOPE * x)


def _lrelu_prime(x: Matrix) -> Matrix:
    # subgradient at 0 is the leak slope
    return np.where(x > 0.0, 1.0, LRELU_SLOPE)


def _tanh_prime(x: Matrix) -> Matrix:
    t = np.tanh(x)
    return 1.0 - t * t


ACTIVATIONS: dict[str, Activation] = {
    "tanh": Activation("tanh", np.tanh, _tanh_prime),
    "lrelu": Activation("lrelu", _lrelu, _lrelu_prime),
    "identity": Activation("identity", lambda x: x.copy(), np.ones_like),
}


def get_activation(name: str) -> Activation:
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ValueError(
            f"Unknown activation '{name}'. Available: {', '.join(sorted(ACTIVATIONS))}"
        ) from None
