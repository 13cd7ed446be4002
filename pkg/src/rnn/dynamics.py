"""Unrolled recurrent dynamics, masked sequence loss and backpropagation through time."""

from collections.abc import Sequence

import numpy as np

from autodiff import Tape, Var, composed, gradients
from ffnn.dynamics import accuracy, init_weight_matrices
from tensor import Matrix, ShapeError

from .network import RnnSpec, RnnTrace


def unroll(
    spec: RnnSpec,
    weights: Sequence[Var],
    x_seq: Sequence[Var],
    upto: int | None = None,
) -> tuple[dict[int, list[Var]], dict[int, list[Var]]]:
    """Run the recurrence on the tape for layers 3..``upto``.

    The context fed to step 0 is zero. ``upto`` must reach the context layer.

    Returns:
        (sums, activations) keyed by layer, each a list over steps; activations also hold
        layers 1 and 2
    """
    last = spec.n_layers if upto is None else upto
    if last < spec.c_l:
        raise ValueError(f"unroll must reach the context layer {spec.c_l}, got {last}")
    tape = x_seq[0].tape
    n = x_seq[0].shape[1]
    ones = tape.constant(np.ones((1, n)))
    context = tape.constant(np.zeros((spec.width(2), n)))
    sums: dict[int, list[Var]] = {j: [] for j in range(3, last + 1)}
    acts: dict[int, list[Var]] = {j: [] for j in range(1, last + 1)}
    for x in x_seq:
        layer: dict[int, Var] = {0: ones, 1: x, 2: context}
        for j in range(3, last + 1):
            b = composed.concat_rows([layer[k] for k in spec.inputs_to(j)])
            s = weights[j - 3] @ b
            layer[j] = composed.activation(s, spec.activation_of(j))
            sums[j].append(s)
        context = layer[spec.c_l]
        for j in acts:
            acts[j].append(layer[j])
    return sums, acts


def _included(step_mask: Sequence[bool] | None, n_steps: int) -> list[int]:
    mask = [True] * n_steps if step_mask is None else list(step_mask)
    if len(mask) != n_steps:
        raise ValueError(f"step mask has {len(mask)} entries for {n_steps} steps")
    steps = [t for t, keep in enumerate(mask) if keep]
    if not steps:
        raise ValueError("step mask excludes every step")
    return steps


def sequence_loss(
    spec: RnnSpec,
    outputs: Sequence[Var],
    labels: Sequence[Matrix],
    step_mask: Sequence[bool] | None = None,
) -> Var:
    """Mean loss over every column of every unmasked step; masked steps do not enter."""
    steps = _included(step_mask, len(outputs))
    y = composed.concat_cols([outputs[t] for t in steps])
    target = np.hstack([labels[t] for t in steps])
    if spec.head == "softmax_xent":
        return composed.softmax_xent_loss(y, target)
    return composed.mse_loss(y, target)


def rnn_forward(
    spec: RnnSpec, weights: Sequence[Matrix], x_seq: Sequence[Matrix]
) -> tuple[RnnTrace, list[Matrix]]:
    """Unrolled forward pass; returns the trace and Y^(t) = S_nL^(t) for every step."""
    spec.check_weights(weights)
    spec.check_sequence(x_seq)
    tape = Tape()
    sums, acts = unroll(
        spec, [tape.constant(w) for w in weights], [tape.constant(x) for x in x_seq]
    )
    trace = RnnTrace(
        {j: tuple(v.value for v in vs) for j, vs in sums.items()},
        {j: tuple(v.value for v in vs) for j, vs in acts.items()},
    )
    return trace, list(trace.sums[spec.n_layers])


def rnn_loss_and_accuracy(
    spec: RnnSpec,
    weights: Sequence[Matrix],
    x_seq: Sequence[Matrix],
    labels: Sequence[Matrix],
    step_mask: Sequence[bool] | None = None,
) -> tuple[float, float]:
    """Masked loss and per-bit accuracy over the unmasked steps."""
    _, outputs = rnn_forward(spec, weights, x_seq)
    steps = _included(step_mask, len(outputs))
    y = np.hstack([outputs[t] for t in steps])
    target = np.hstack([labels[t] for t in steps])
    if y.shape != target.shape:
        raise ShapeError("rnn loss", y.shape, target.shape)
    tape = Tape()
    loss = sequence_loss(spec, [tape.constant(y)], [target])
    return float(loss.value[0, 0]), accuracy(y, target)


def rnn_loss_and_weight_gradient(
    spec: RnnSpec,
    weights: Sequence[Matrix],
    x_seq: Sequence[Matrix],
    labels: Sequence[Matrix],
    step_mask: Sequence[bool] | None = None,
) -> tuple[float, list[Matrix]]:
    """Backpropagation through time over the whole sequence."""
    spec.check_weights(weights)
    spec.check_sequence(x_seq)
    tape = Tape()
    weight_vars = [tape.leaf(w) for w in weights]
    sums, _ = unroll(spec, weight_vars, [tape.constant(x) for x in x_seq])
    loss = sequence_loss(spec, sums[spec.n_layers], labels, step_mask)
    return float(loss.value[0, 0]), gradients(tape, loss, weight_vars)


def init_rnn_weights(
    spec: RnnSpec, seed: int | np.random.Generator, scheme: str = "glorot"
) -> list[Matrix]:
    return init_weight_matrices(spec.weight_shapes(), seed, scheme)  # type: ignore[arg-type]
