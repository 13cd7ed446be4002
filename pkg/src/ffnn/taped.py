"""Target-space loss recorded on an autodiff tape.

The conversion, the forward pass and the loss are composed from tape primitives, so one
reverse sweep yields dL'/dT for either untangling rule.
"""

from autodiff import Tape, Var, composed, gradients
from tensor import Matrix

from .dynamics import forward, head_loss
from .mapping import Untangling, targets_to_weights_ocu, targets_to_weights_scu
from .network import NetworkSpec, TargetParams, bias_row


def _masked(a: Var, mask: Matrix | None) -> Var:
    return a if mask is None else a * mask


def taped_weights(
    spec: NetworkSpec,
    target_vars: list[Var],
    xbar: Matrix,
    lam: float,
    untangling: Untangling = "scu",
    masks: list[Matrix | None] | None = None,
) -> list[Var]:
    tape = target_vars[0].tape
    n = xbar.shape[1]
    acts: dict[int, Var] = {0: tape.constant(bias_row(n)), 1: tape.constant(xbar)}
    weights = []
    for j in range(2, spec.n_layers + 1):
        b = composed.concat_rows([acts[k] for k in spec.inputs_to(j)])
        target = target_vars[j - 2]
        w = composed.lstsq_weights(target, b, lam)
        carried = w @ b if untangling == "scu" else target
        a = composed.activation(carried, spec.activation_of(j))
        if masks is not None and j < spec.n_layers:
            a = _masked(a, masks[j - 2])
        acts[j] = a
        weights.append(w)
    return weights


def taped_forward(
    spec: NetworkSpec,
    weight_vars: list[Var],
    x: Matrix,
    masks: list[Matrix | None] | None = None,
) -> Var:
    """Output Y = S_nL of the forward pass over ``x``."""
    tape = weight_vars[0].tape
    n = x.shape[1]
    acts: dict[int, Var] = {0: tape.constant(bias_row(n)), 1: tape.constant(x)}
    s = acts[1]
    for j in range(2, spec.n_layers + 1):
        b = composed.concat_rows([acts[k] for k in spec.inputs_to(j)])
        s = weight_vars[j - 2] @ b
        if j < spec.n_layers:
            a = composed.activation(s, spec.activation_of(j))
            acts[j] = _masked(a, masks[j - 2] if masks is not None else None)
    return s


def taped_loss(spec: NetworkSpec, y: Var, labels: Matrix) -> Var:
    if spec.output_head == "softmax_xent":
        return composed.softmax_xent_loss(y, labels)
    return composed.mse_loss(y, labels)


def target_loss_and_gradient_autograd(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    x: Matrix,
    labels: Matrix,
    untangling: Untangling = "scu",
    x_masks: list[Matrix | None] | None = None,
    xbar_masks: list[Matrix | None] | None = None,
) -> tuple[float, list[Matrix]]:
    """L'(T) and dL'/dT_j by a single reverse sweep."""
    t.check(spec)
    tape = Tape()
    target_vars = [tape.leaf(target) for target in t.targets]
    weights = taped_weights(spec, target_vars, t.xbar, lam, untangling, xbar_masks)
    loss = taped_loss(spec, taped_forward(spec, weights, x, x_masks), labels)
    return float(loss.value[0, 0]), gradients(tape, loss, target_vars)


def target_loss(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    x: Matrix,
    labels: Matrix,
    untangling: Untangling = "scu",
) -> float:
    """L'(T) evaluated directly, without recording a tape."""
    if untangling == "scu":
        w, _ = targets_to_weights_scu(spec, t, lam)
    else:
        w = targets_to_weights_ocu(spec, t, lam)
    return head_loss(spec, forward(spec, w, x).output, labels)[0]
