"""Targets-to-weights conversion for recurrent networks, on the tape.

Both conversions solve every layer over the time-concatenated stack B̃_j^(:), so the
Gramian stays the size of the layer's stacked input. The context fed back into layer 2 is
first estimated optimistically as g(T_cL). The SCU conversion then carries achieved
activations forward within the layers and, once the context layer is solved, reruns the
recurrence up to it on X̄ so the exit layers see the true inputs.
"""

import logging
from collections.abc import Sequence

import numpy as np

from autodiff import Tape, Var, composed, gradients
from ffnn.mapping import Untangling, truncated_normal
from tensor import Matrix

from .dynamics import rnn_forward, sequence_loss, unroll
from .network import RnnSpec, RnnTargetParams

logger = logging.getLogger(__name__)


def _steps(rolled: Var, n_steps: int, n: int) -> list[Var]:
    if n_steps == 1:
        return [rolled]
    return [composed.slice_cols(rolled, t * n, (t + 1) * n) for t in range(n_steps)]


def taped_rnn_weights(
    spec: RnnSpec,
    target_vars: Sequence[Var],
    xbar: Sequence[Matrix],
    lam: float,
    untangling: Untangling = "scu",
) -> list[Var]:
    """Rolled-up targets on the tape to weights W̃_3..W̃_nL."""
    tape = target_vars[0].tape
    n_steps, n = len(xbar), xbar[0].shape[1]
    x_vars = [tape.constant(x) for x in xbar]
    ones = tape.constant(np.ones((1, n)))
    c_l = spec.c_l

    estimate = _steps(
        composed.activation(target_vars[c_l - 3], spec.activation_of(c_l)), n_steps, n
    )
    acts: dict[int, list[Var]] = {
        0: [ones] * n_steps,
        1: x_vars,
        2: [tape.constant(np.zeros((spec.width(2), n)))] + estimate[:-1],
    }
    weights: list[Var] = []
    for j in spec.layers():
        b = composed.concat_cols(
            [composed.concat_rows([acts[k][t] for k in spec.inputs_to(j)]) for t in range(n_steps)]
        )
        target = target_vars[j - 3]
        w = composed.lstsq_weights(target, b, lam)
        weights.append(w)
        carried = w @ b if untangling == "scu" else target
        acts[j] = _steps(composed.activation(carried, spec.activation_of(j)), n_steps, n)
        if untangling == "scu" and j == c_l:
            _, rerun = unroll(spec, weights, x_vars, upto=c_l)
            acts.update(rerun)
    return weights


def _convert(
    spec: RnnSpec, t: RnnTargetParams, lam: float, untangling: Untangling
) -> list[Matrix]:
    t.check(spec)
    tape = Tape()
    weights = taped_rnn_weights(
        spec, [tape.constant(target) for target in t.targets], t.xbar, lam, untangling
    )
    logger.debug(
        "rnn %s mapping: nbar_t=%d nbar_b=%d lambda=%g", untangling, t.nbar_t, t.nbar_b, lam
    )
    return [w.value for w in weights]


def rnn_targets_to_weights_scu(spec: RnnSpec, t: RnnTargetParams, lam: float) -> list[Matrix]:
    """SCU within layers, optimistic context estimate, one corrective rerun at the context layer.

    Raises:
        SingularMatrixError: if a rolled-up Gramian cannot be factorized at ``lam == 0``
    """
    return _convert(spec, t, lam, "scu")


def rnn_targets_to_weights_ocu(spec: RnnSpec, t: RnnTargetParams, lam: float) -> list[Matrix]:
    """Every layer carries g(T_j) forward; no rerun."""
    return _convert(spec, t, lam, "ocu")


def rnn_loss_and_target_gradient(
    spec: RnnSpec,
    t: RnnTargetParams,
    lam: float,
    x_seq: Sequence[Matrix],
    labels: Sequence[Matrix],
    step_mask: Sequence[bool] | None = None,
    untangling: Untangling = "scu",
) -> tuple[float, list[Matrix]]:
    """L'(T) over a training sequence batch and dL'/dT by reverse sweep."""
    t.check(spec)
    spec.check_sequence(x_seq)
    tape = Tape()
    target_vars = [tape.leaf(target) for target in t.targets]
    weights = taped_rnn_weights(spec, target_vars, t.xbar, lam, untangling)
    sums, _ = unroll(spec, weights, [tape.constant(x) for x in x_seq])
    loss = sequence_loss(spec, sums[spec.n_layers], labels, step_mask)
    return float(loss.value[0, 0]), gradients(tape, loss, target_vars)


def rnn_init_targets(
    spec: RnnSpec, xbar: Sequence[Matrix], sigma: float, seed: int | np.random.Generator
) -> RnnTargetParams:
    """Truncated-normal rolled-up targets over the given X̄ sequence."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    spec.check_sequence(xbar)
    rng = np.random.default_rng(seed)
    columns = len(xbar) * xbar[0].shape[1]
    targets = tuple(truncated_normal(rng, (spec.width(j), columns), sigma) for j in spec.layers())
    return RnnTargetParams(targets, tuple(xbar))


def rnn_project_targets(spec: RnnSpec, t: RnnTargetParams, lam: float) -> RnnTargetParams:
    """Replace every T_j^(t) by the S_j^(t) the SCU weights achieve when run over X̄."""
    weights = rnn_targets_to_weights_scu(spec, t, lam)
    trace, _ = rnn_forward(spec, weights, t.xbar)
    return t.with_targets([trace.rolled_sums(j) for j in spec.layers()])
