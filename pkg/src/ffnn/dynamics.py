"""Weight-space dynamics: forward pass, loss heads, backpropagation and initialisation."""

from typing import Literal

import numpy as np

from autodiff import get_activation, softmax
from tensor import Matrix, ShapeError

from .network import ForwardTrace, NetworkSpec, WeightParams, bias_row

InitScheme = Literal["glorot", "he"]


def forward(
    spec: NetworkSpec,
    w: WeightParams,
    x: Matrix,
    masks: list[Matrix | None] | None = None,
) -> ForwardTrace:
    """Feed-forward dynamics.

    Args:
        spec: network description
        w: stacked weights, one per layer 2..nL
        x: input matrix, d1 rows by batch columns
        masks: optional dropout masks for layers 2..nL (``None`` entries and the last entry
            are ignored for the output layer)

    Returns:
        The work-space trace; ``trace.output`` is Y = S_nL.
    """
    w.check(spec)
    if x.ndim != 2 or x.shape[0] != spec.layer_widths[0]:
        raise ShapeError("forward input", x.shape, (spec.layer_widths[0], -1))
    n = x.shape[1]
    activations: list[Matrix] = [bias_row(n), x]
    sums: list[Matrix] = []
    used_masks: list[Matrix | None] = []
    for j in range(2, spec.n_layers + 1):
        b = np.vstack([activations[k] for k in spec.inputs_to(j)])
        s = w.weights[j - 2] @ b
        a = get_activation(spec.activation_of(j)).fn(s)
        mask = masks[j - 2] if masks is not None and j < spec.n_layers else None
        if mask is not None:
            a = a * mask
        sums.append(s)
        activations.append(a)
        used_masks.append(mask)
    return ForwardTrace(tuple(sums), tuple(activations), tuple(used_masks))


def head_loss(spec: NetworkSpec, y: Matrix, labels: Matrix) -> tuple[float, Matrix]:
    """Mean loss over batch columns and its adjoint with respect to Y."""
    if y.shape != labels.shape:
        raise ShapeError("loss", y.shape, labels.shape)
    n = y.shape[1]
    if spec.output_head == "softmax_xent":
        shifted = y - y.max(axis=0, keepdims=True)
        log_p = shifted - np.log(np.exp(shifted).sum(axis=0, keepdims=True))
        loss = -float(np.sum(labels * log_p)) / n
        return loss, (np.exp(log_p) - labels) / n
    r = y - labels
    return float(np.sum(r * r)) / n, 2.0 * r / n


def accuracy(y: Matrix, labels: Matrix) -> float:
    """Fraction of columns whose arg-max class matches the label's.

    Single-row outputs count a hit when the prediction is within 0.5 of the label.
    """
    if y.shape[1] == 0:
        return 0.0
    if y.shape[0] == 1:
        return float(np.mean(np.abs(y - labels) < 0.5))
    return float(np.mean(np.argmax(y, axis=0) == np.argmax(labels, axis=0)))


def loss_and_accuracy(
    spec: NetworkSpec, w: WeightParams, x: Matrix, labels: Matrix
) -> tuple[float, float]:
    y = forward(spec, w, x).output
    loss, _ = head_loss(spec, y, labels)
    return loss, accuracy(y, labels)


def backprop(
    spec: NetworkSpec, w: WeightParams, trace: ForwardTrace, d_output: Matrix
) -> list[Matrix]:
    """Propagate dL/dY back through a recorded trace, returning dL/dW̃ per layer."""
    n_layers = spec.n_layers
    d_act: dict[int, Matrix] = {}
    grads: list[Matrix] = [np.empty((0, 0))] * (n_layers - 1)
    for j in range(n_layers, 1, -1):
        if j == n_layers:
            d_sum = d_output
        else:
            d_sum = d_act[j] * get_activation(spec.activation_of(j)).derivative(trace.sum_of(j))
            mask = trace.mask_of(j)
            if mask is not None:
                d_sum = d_sum * mask
        grads[j - 2] = d_sum @ trace.stack(spec, j).T
        d_stack = w.weights[j - 2].T @ d_sum
        offset = 0
        for k in spec.inputs_to(j):
            width = spec.width(k)
            if k >= 2:
                block = d_stack[offset : offset + width]
                d_act[k] = d_act[k] + block if k in d_act else block
            offset += width
    return grads


def loss_and_weight_gradient(
    spec: NetworkSpec,
    w: WeightParams,
    x: Matrix,
    labels: Matrix,
    masks: list[Matrix | None] | None = None,
) -> tuple[float, list[Matrix]]:
    trace = forward(spec, w, x, masks)
    loss, d_output = head_loss(spec, trace.output, labels)
    return loss, backprop(spec, w, trace, d_output)


def weight_gradient(
    spec: NetworkSpec,
    w: WeightParams,
    x: Matrix,
    labels: Matrix,
    masks: list[Matrix | None] | None = None,
) -> list[Matrix]:
    """Exact dL/dW̃_j for every layer, with L the mean over batch columns."""
    return loss_and_weight_gradient(spec, w, x, labels, masks)[1]


def init_weight_matrices(
    shapes: list[tuple[int, int]], seed: int | np.random.Generator, scheme: InitScheme = "glorot"
) -> list[Matrix]:
    """Random stacked weights with a zero bias column.

    ``glorot`` draws uniformly on ±sqrt(6/(fan_in+fan_out)); ``he`` draws normal with
    standard deviation sqrt(2/fan_in).
    """
    rng = np.random.default_rng(seed)
    weights = []
    for rows, cols in shapes:
        fan_in = cols - 1
        if scheme == "glorot":
            limit = np.sqrt(6.0 / (fan_in + rows))
            core = rng.uniform(-limit, limit, size=(rows, fan_in))
        elif scheme == "he":
            core = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(rows, fan_in))
        else:
            raise ValueError(f"Unknown init scheme '{scheme}'. Available: glorot, he")
        weights.append(np.hstack([np.zeros((rows, 1)), core]))
    return weights


def init_weights(
    spec: NetworkSpec, seed: int | np.random.Generator, scheme: InitScheme = "glorot"
) -> WeightParams:
    return WeightParams(tuple(init_weight_matrices(spec.weight_shapes(), seed, scheme)))


def output_probabilities(spec: NetworkSpec, y: Matrix) -> Matrix:
    """Class probabilities for the softmax head; the raw output otherwise."""
    return softmax(y) if spec.output_head == "softmax_xent" else y
