"""The weight step implied by a target-space gradient step.

With J = dW/dT the Jacobian of the targets-to-weights map, a step ΔT = -η·dL'/dT moves the
weights by approximately -η·J·Jᵀ·dL/dW, a positive semi-definite preconditioning of the
weight gradient. Only tiny networks are handled: J is assembled densely.
"""

import logging

import numpy as np

from autodiff import Tape, vjp
from ffnn.dynamics import loss_and_weight_gradient
from ffnn.mapping import Untangling, targets_to_weights
from ffnn.network import NetworkSpec, TargetParams
from ffnn.taped import taped_weights, target_loss_and_gradient_autograd
from tensor import ArgumentError, Matrix

logger = logging.getLogger(__name__)

DEFAULT_COLUMN_CAP = 200


class JacobianTooLargeError(ValueError):
    def __init__(self, columns: int, cap: int) -> None:
        super().__init__(f"Jacobian would have {columns} columns, cap is {cap}")


def _flatten(matrices: list[Matrix]) -> np.ndarray:
    return np.concatenate([m.reshape(-1) for m in matrices])


def _unflatten(vector: np.ndarray, shapes: list[tuple[int, int]]) -> list[Matrix]:
    out, offset = [], 0
    for rows, cols in shapes:
        out.append(vector[offset : offset + rows * cols].reshape(rows, cols))
        offset += rows * cols
    return out


def target_jacobian(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    cap: int = DEFAULT_COLUMN_CAP,
    untangling: Untangling = "scu",
) -> Matrix:
    """Dense J with one row per weight entry and one column per target entry.

    Each row comes from one reverse sweep seeded with a unit weight coordinate.

    Raises:
        JacobianTooLargeError: if the targets have more than ``cap`` entries
    """
    columns = sum(target.size for target in t.targets)
    if columns > cap:
        raise JacobianTooLargeError(columns, cap)
    tape = Tape()
    target_vars = [tape.leaf(target) for target in t.targets]
    weights = taped_weights(spec, target_vars, t.xbar, lam, untangling)
    rows = []
    for layer, w in enumerate(weights):
        for index in range(w.value.size):
            seeds = [np.zeros(v.shape) for v in weights]
            seeds[layer].reshape(-1)[index] = 1.0
            adjoints = vjp(tape, weights, seeds)
            rows.append(
                _flatten([adjoints.get(v.id, np.zeros(v.shape)) for v in target_vars])
            )
    logger.debug("assembled %dx%d target Jacobian", len(rows), columns)
    return np.vstack(rows)


def preconditioner_step(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    x: Matrix,
    labels: Matrix,
    eta: float,
    cap: int = DEFAULT_COLUMN_CAP,
) -> list[Matrix]:
    """Predicted ΔW = -η·J·Jᵀ·dL/dW, one matrix per layer."""
    if not eta > 0.0:
        raise ArgumentError(f"eta must be positive, got {eta}")
    jacobian = target_jacobian(spec, t, lam, cap)
    w = targets_to_weights(spec, t, lam)
    _, d_weights = loss_and_weight_gradient(spec, w, x, labels)
    step = -eta * (jacobian @ (jacobian.T @ _flatten(d_weights)))
    return _unflatten(step, spec.weight_shapes())


def actual_weight_step(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    x: Matrix,
    labels: Matrix,
    eta: float,
) -> list[Matrix]:
    """M(T - η·dL'/dT) - M(T)."""
    _, d_targets = target_loss_and_gradient_autograd(spec, t, lam, x, labels)
    stepped = t.with_targets([target - eta * g for target, g in zip(t.targets, d_targets)])
    before = targets_to_weights(spec, t, lam).weights
    after = targets_to_weights(spec, stepped, lam).weights
    return [b - a for a, b in zip(before, after, strict=True)]


def first_order_slope(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    x: Matrix,
    labels: Matrix,
    etas: tuple[float, ...] = (1e-3, 5e-4, 2.5e-4),
    cap: int = DEFAULT_COLUMN_CAP,
) -> float:
    """Log-log slope of ‖ΔW_actual - ΔW_predicted‖ against η; close to 2 when J is right."""
    gaps = []
    for eta in etas:
        predicted = preconditioner_step(spec, t, lam, x, labels, eta, cap)
        actual = actual_weight_step(spec, t, lam, x, labels, eta)
        gaps.append(float(np.linalg.norm(_flatten(actual) - _flatten(predicted))))
    slope, _ = np.polyfit(np.log(etas), np.log(gaps), 1)
    return float(slope)
