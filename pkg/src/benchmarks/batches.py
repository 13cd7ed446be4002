"""Labelled batches: column-per-example matrices and per-step sequences."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from tensor import Matrix, ShapeError


def one_hot(classes: np.ndarray, n_classes: int) -> Matrix:
    """n_classes x n matrix with a single 1 per column."""
    classes = np.asarray(classes, dtype=np.int64)
    out = np.zeros((n_classes, classes.size))
    out[classes, np.arange(classes.size)] = 1.0
    return out


@dataclass(frozen=True)
class LabeledBatch:
    inputs: Matrix
    labels: Matrix

    def __post_init__(self) -> None:
        if self.inputs.shape[1] != self.labels.shape[1]:
            raise ShapeError("LabeledBatch", self.inputs.shape, self.labels.shape)

    @property
    def size(self) -> int:
        return int(self.inputs.shape[1])

    def subset(self, columns: Sequence[int] | np.ndarray) -> "LabeledBatch":
        idx = np.asarray(columns, dtype=np.int64)
        return LabeledBatch(self.inputs[:, idx], self.labels[:, idx])

    def take(self, n: int) -> "LabeledBatch":
        return self.subset(np.arange(min(n, self.size)))


@dataclass(frozen=True)
class SequenceBatch:
    """Equal-width input and label matrices per step, and which steps enter the loss."""

    inputs: tuple[Matrix, ...]
    labels: tuple[Matrix, ...]
    loss_mask: tuple[bool, ...]

    def __post_init__(self) -> None:
        if not (len(self.inputs) == len(self.labels) == len(self.loss_mask)):
            raise ValueError(
                f"sequence lengths differ: {len(self.inputs)} inputs, {len(self.labels)} labels,"
                f" {len(self.loss_mask)} mask entries"
            )
        widths = {m.shape[1] for m in (*self.inputs, *self.labels)}
        if len(widths) > 1:
            raise ShapeError("SequenceBatch", *(m.shape for m in self.inputs))

    @property
    def n_steps(self) -> int:
        return len(self.inputs)

    @property
    def size(self) -> int:
        return int(self.inputs[0].shape[1]) if self.inputs else 0

    def subset(self, columns: Sequence[int] | np.ndarray) -> "SequenceBatch":
        idx = np.asarray(columns, dtype=np.int64)
        return SequenceBatch(
            tuple(x[:, idx] for x in self.inputs),
            tuple(y[:, idx] for y in self.labels),
            self.loss_mask,
        )

    def bits(self) -> np.ndarray:
        """Input bits as an (n_steps, size) integer array."""
        return np.vstack([x[0] for x in self.inputs]).astype(np.int64)
