"""The two-spirals benchmark: 97 points per spiral over three revolutions."""

import numpy as np

from .batches import LabeledBatch, one_hot

POINTS_PER_SPIRAL = 97
RADIUS = 6.5


def _spiral_points(index: np.ndarray) -> np.ndarray:
    angle = index * np.pi / 16.0
    radius = RADIUS * (104.0 - index) / 104.0
    return np.vstack([radius * np.sin(angle), radius * np.cos(angle)])


def _interleave(points: np.ndarray) -> LabeledBatch:
    n = points.shape[1]
    inputs = np.empty((2, 2 * n))
    inputs[:, 0::2] = points
    inputs[:, 1::2] = -points
    classes = np.tile([0, 1], n)
    return LabeledBatch(inputs / RADIUS, one_hot(classes, 2))


def gen_two_spirals() -> tuple[LabeledBatch, LabeledBatch]:
    """194 training points and 192 test points at the angular midpoints.

    Columns alternate spiral 1 (class 0) and spiral 2 (class 1); spiral 2 is the negation of
    spiral 1. Inputs are divided by the outer radius so they lie in [-1, 1].
    """
    train = _spiral_points(np.arange(POINTS_PER_SPIRAL, dtype=np.float64))
    test = _spiral_points(np.arange(POINTS_PER_SPIRAL - 1, dtype=np.float64) + 0.5)
    return _interleave(train), _interleave(test)
