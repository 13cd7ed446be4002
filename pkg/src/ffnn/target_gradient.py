"""Closed-form gradient of the loss with respect to the targets.

Walks the layers from the output back to layer 2 over the SCU trace of X̄, turning the
weight-space gradient dL/dW̃_j into dL'/dT_j. Each layer contributes a term through its own
pseudoinverse plus a correction for the gap T_j - S_j that flows into earlier layers.
"""

import numpy as np

from autodiff import get_activation
from tensor import Matrix, ShapeError, reg_pseudoinverse, spd_solve

from .dynamics import loss_and_weight_gradient
from .mapping import targets_to_weights_scu
from .network import ForwardTrace, NetworkSpec, TargetParams


def _check_trace(spec: NetworkSpec, t: TargetParams, trace: ForwardTrace) -> None:
    if len(trace.sums) != len(t.targets) or len(trace.activations) != spec.n_layers + 1:
        raise ValueError(
            f"trace has {len(trace.sums)} layers, targets have {len(t.targets)}"
        )
    for s, target in zip(trace.sums, t.targets, strict=True):
        if s.shape != target.shape:
            raise ShapeError("target_gradient_manual trace", s.shape, target.shape)
    if not np.array_equal(trace.activations[1], t.xbar):
        raise ValueError("trace was not computed over the targets' X̄")


def target_gradient_manual(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    d_weights: list[Matrix],
    scu_trace: ForwardTrace,
) -> list[Matrix]:
    """dL'/dT_j for every layer.

    Args:
        spec: network description
        t: targets the trace was computed from
        lam: the regulariser used for the trace
        d_weights: dL/dW̃_j per layer, from backpropagation over the training batch
        scu_trace: the trace returned by ``targets_to_weights_scu`` for ``t`` and ``lam``

    Returns:
        One gradient per target matrix, same shapes as ``t.targets``

    Raises:
        ValueError: if the trace does not belong to ``t``
    """
    _check_trace(spec, t, scu_trace)
    if [g.shape for g in d_weights] != spec.weight_shapes():
        raise ShapeError("target_gradient_manual", *(g.shape for g in d_weights))
    n_layers = spec.n_layers
    d_act: dict[int, Matrix] = {}
    d_targets: list[Matrix] = [np.empty((0, 0))] * (n_layers - 1)
    for j in range(n_layers, 1, -1):
        b = scu_trace.stack(spec, j)
        s = scu_trace.sum_of(j)
        target = t.targets[j - 2]
        d_w = d_weights[j - 2]
        if j in d_act:
            d_sum = d_act[j] * get_activation(spec.activation_of(j)).derivative(s)
            mask = scu_trace.mask_of(j)
            if mask is not None:
                d_sum = d_sum * mask
        else:
            d_sum = np.zeros_like(s)

        pinv = reg_pseudoinverse(b, lam)
        w = target @ pinv
        w_bar = d_w + d_sum @ b.T
        d_targets[j - 2] = w_bar @ pinv.T
        if j == 2:
            break

        gram = b @ b.T
        gram[np.diag_indices_from(gram)] += lam
        d_stack = w.T @ (d_sum - d_targets[j - 2]) + spd_solve(gram, w_bar.T) @ (target - s)

        offset = 0
        for k in spec.inputs_to(j):
            width = spec.width(k)
            if k >= 2:
                block = d_stack[offset : offset + width]
                d_act[k] = d_act[k] + block if k in d_act else block
            offset += width
    return d_targets


def loss_and_target_gradient(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    x: Matrix,
    labels: Matrix,
    x_masks: list[Matrix | None] | None = None,
    xbar_masks: list[Matrix | None] | None = None,
) -> tuple[float, list[Matrix]]:
    """SCU conversion, backpropagation over ``x``, then the closed-form target gradient."""
    w, trace = targets_to_weights_scu(spec, t, lam, xbar_masks)
    loss, d_weights = loss_and_weight_gradient(spec, w, x, labels, x_masks)
    return loss, target_gradient_manual(spec, t, lam, d_weights, trace)
