"""Gradient steps over a list of parameter matrices.

The same code updates weights or targets; nothing here knows which it is handling.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from tensor import ArgumentError, Matrix, ShapeError

logger = logging.getLogger(__name__)

OptimizerKind = Literal["sgd", "adam"]


@dataclass(frozen=True)
class OptimizerState:
    kind: OptimizerKind
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moment: tuple[Matrix, ...] = field(default=())
    second_moment: tuple[Matrix, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind not in ("sgd", "adam"):
            raise ArgumentError(f"Unknown optimizer '{self.kind}'. Available: sgd, adam")
        if not self.learning_rate > 0.0:
            raise ArgumentError(f"learning rate must be positive, got {self.learning_rate}")
        if self.step < 0:
            raise ArgumentError(f"step count must be nonnegative, got {self.step}")


def _check(params: Sequence[Matrix], grads: Sequence[Matrix]) -> None:
    if len(params) != len(grads) or any(p.shape != g.shape for p, g in zip(params, grads)):
        raise ShapeError(
            "optimizer step", *(p.shape for p in params), *(g.shape for g in grads)
        )


def sgd_step(
    state: OptimizerState, params: Sequence[Matrix], grads: Sequence[Matrix]
) -> list[Matrix]:
    """params - η·grads."""
    _check(params, grads)
    eta = state.learning_rate
    return [p - eta * g for p, g in zip(params, grads, strict=True)]


def adam_step(
    state: OptimizerState, params: Sequence[Matrix], grads: Sequence[Matrix]
) -> tuple[OptimizerState, list[Matrix]]:
    """One bias-corrected Adam update.

    Moments start at zero on the first call and must keep the parameter shapes afterwards.
    """
    _check(params, grads)
    m = state.first_moment or tuple(np.zeros_like(p) for p in params)
    v = state.second_moment or tuple(np.zeros_like(p) for p in params)
    if [x.shape for x in m] != [p.shape for p in params] or len(v) != len(m):
        raise ShapeError("adam moments", *(x.shape for x in m), *(p.shape for p in params))
    b1, b2 = state.beta1, state.beta2
    t = state.step + 1
    m = tuple(b1 * mi + (1.0 - b1) * g for mi, g in zip(m, grads, strict=True))
    v = tuple(b2 * vi + (1.0 - b2) * g * g for vi, g in zip(v, grads, strict=True))
    scale_m = 1.0 / (1.0 - b1**t)
    scale_v = 1.0 / (1.0 - b2**t)
    eta = state.learning_rate
    updated = [
        p - eta * (mi * scale_m) / (np.sqrt(vi * scale_v) + state.eps)
        for p, mi, vi in zip(params, m, v, strict=True)
    ]
    return replace(state, step=t, first_moment=m, second_moment=v), updated


class Sgd:
    """Plain gradient descent with a fixed learning rate."""

    def __init__(self, learning_rate: float) -> None:
        self.state = OptimizerState("sgd", learning_rate)

    def step(self, params: Sequence[Matrix], grads: Sequence[Matrix]) -> list[Matrix]:
        self.state = replace(self.state, step=self.state.step + 1)
        return sgd_step(self.state, params, grads)


class Adam:
    def __init__(
        self,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        self.state = OptimizerState("adam", learning_rate, beta1, beta2, eps)

    def step(self, params: Sequence[Matrix], grads: Sequence[Matrix]) -> list[Matrix]:
        self.state, updated = adam_step(self.state, params, grads)
        return updated


def make_optimizer(kind: OptimizerKind, learning_rate: float) -> Sgd | Adam:
    if kind == "sgd":
        return Sgd(learning_rate)
    if kind == "adam":
        return Adam(learning_rate)
    raise ArgumentError(f"Unknown optimizer '{kind}'. Available: sgd, adam")


def halving_step_size(
    loss: Callable[[Sequence[Matrix]], float],
    params: Sequence[Matrix],
    grads: Sequence[Matrix],
    eta0: float = 1e-2,
    max_halvings: int = 60,
) -> float:
    """Largest η = eta0/2^k for which one descent step does not raise ``loss``.

    Returns 0.0 (and logs a warning) if every tried step raises the loss.
    """
    base = loss(params)
    eta = eta0
    for _ in range(max_halvings + 1):
        trial = sgd_step(OptimizerState("sgd", eta), params, grads)
        if loss(trial) <= base:
            return eta
        eta *= 0.5
    logger.warning("Halving search exhausted after %d halvings (loss %.6e)", max_halvings, base)
    return 0.0
