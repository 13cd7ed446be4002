"""Protocol interfaces for targetspace components.

These protocols define the contracts that components must follow,
enabling dependency injection, testing, and alternative implementations.
"""

from collections.abc import Sequence
from typing import Protocol

import numpy as np

from storage import MetricsRecord


class OptimizerProtocol(Protocol):
    """Protocol for parameter-space-agnostic optimizers."""

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Apply one update.

        Args:
            params: Current weight or target matrices
            grads: Loss gradients, shaped like ``params``

        Returns:
            The updated matrices
        """
        ...


class MetricsSinkProtocol(Protocol):
    """Protocol for telemetry backends."""

    def write_header(self) -> None:
        """Start a fresh record stream."""
        ...

    def append(self, record: MetricsRecord) -> None:
        """Store one record; iterations arrive strictly increasing."""
        ...

    def close(self) -> None:
        ...


class ClockProtocol(Protocol):
    """Protocol for wall-clock sources (seconds as float)."""

    def __call__(self) -> float:
        ...
