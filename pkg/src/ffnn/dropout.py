"""Inverted dropout masks for the weight-space pass over X and the mapping pass over X̄."""

from collections.abc import Sequence

import numpy as np

from tensor import ArgumentError, Matrix

from .network import NetworkSpec

Seed = int | np.random.Generator


def dropout_masks(shapes: Sequence[tuple[int, int]], rate: float, seed: Seed) -> list[Matrix]:
    """Bernoulli keep masks scaled by 1/(1-rate).

    Raises:
        ArgumentError: if ``rate`` is outside [0, 1)
    """
    if not 0.0 <= rate < 1.0:
        raise ArgumentError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return [np.ones(shape) for shape in shapes]
    rng = np.random.default_rng(seed)
    keep = 1.0 - rate
    return [(rng.random(shape) < keep) / keep for shape in shapes]


def layer_masks(spec: NetworkSpec, n: int, rate: float, seed: Seed) -> list[Matrix | None]:
    """Masks for layers 2..nL over ``n`` columns; the output layer never drops."""
    if rate == 0.0:
        return [None] * (spec.n_layers - 1)
    shapes = [(spec.width(j), n) for j in spec.hidden_layers()]
    masks: list[Matrix | None] = list(dropout_masks(shapes, rate, seed))
    return masks + [None]


def paired_layer_masks(
    spec: NetworkSpec, n_b: int, nbar_b: int, rate: float, seed: Seed
) -> tuple[list[Matrix | None], list[Matrix | None]]:
    """Independent masks for the X pass and the X̄ pass of one training step."""
    rng = np.random.default_rng(seed)
    return layer_masks(spec, n_b, rate, rng), layer_masks(spec, nbar_b, rate, rng)
