"""Targets-to-weights conversion and target initialisation for feed-forward networks."""

import logging
from typing import Literal

import numpy as np

from autodiff import get_activation
from tensor import Matrix, regularized_lstsq

from .dropout import Seed
from .network import ForwardTrace, NetworkSpec, TargetParams, WeightParams, bias_row

logger = logging.getLogger(__name__)

TRUNCATION_BOUND = 2.0

Untangling = Literal["scu", "ocu"]


def _convert(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    carry: Untangling,
    masks: list[Matrix | None] | None,
) -> tuple[WeightParams, ForwardTrace]:
    t.check(spec)
    activations: list[Matrix] = [bias_row(t.nbar_b), t.xbar]
    sums: list[Matrix] = []
    weights: list[Matrix] = []
    used_masks: list[Matrix | None] = []
    for j in range(2, spec.n_layers + 1):
        b = np.vstack([activations[k] for k in spec.inputs_to(j)])
        target = t.targets[j - 2]
        w = regularized_lstsq(target, b, lam)
        s = w @ b
        a = get_activation(spec.activation_of(j)).fn(s if carry == "scu" else target)
        mask = masks[j - 2] if masks is not None and j < spec.n_layers else None
        if mask is not None:
            a = a * mask
        weights.append(w)
        sums.append(s)
        activations.append(a)
        used_masks.append(mask)
    logger.debug(
        "%s mapping: %d layers, nbar_b=%d, lambda=%g", carry, len(weights), t.nbar_b, lam
    )
    return WeightParams(tuple(weights)), ForwardTrace(
        tuple(sums), tuple(activations), tuple(used_masks)
    )


def targets_to_weights_scu(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    masks: list[Matrix | None] | None = None,
) -> tuple[WeightParams, ForwardTrace]:
    """Solve W̃_j = T_j·B̃_j† layer by layer, carrying the achieved g(S_j) forward.

    Args:
        spec: network description
        t: targets and the fixed input X̄
        lam: Tikhonov regulariser of the pseudoinverse
        masks: optional dropout masks applied to hidden activations of the X̄ pass

    Returns:
        The weights and the achieved trace over X̄

    Raises:
        SingularMatrixError: if a Gramian cannot be factorized at ``lam == 0``
    """
    return _convert(spec, t, lam, "scu", masks)


def targets_to_weights_ocu(
    spec: NetworkSpec,
    t: TargetParams,
    lam: float,
    masks: list[Matrix | None] | None = None,
) -> WeightParams:
    """As the SCU conversion, but carrying g(T_j) forward as if every target were met."""
    return _convert(spec, t, lam, "ocu", masks)[0]


def targets_to_weights(
    spec: NetworkSpec, t: TargetParams, lam: float, untangling: Untangling = "scu"
) -> WeightParams:
    return _convert(spec, t, lam, untangling, None)[0]


def truncated_normal(
    rng: np.random.Generator, shape: tuple[int, ...], sigma: float
) -> Matrix:
    """Normal(0, sigma²) samples truncated to ±2·sigma by resampling."""
    out = rng.standard_normal(shape)
    outside = np.abs(out) > TRUNCATION_BOUND
    while outside.any():
        out[outside] = rng.standard_normal(int(outside.sum()))
        outside = np.abs(out) > TRUNCATION_BOUND
    return sigma * out


def init_targets(
    spec: NetworkSpec, nbar_b: int, sigma: float, seed: Seed, *, xbar: Matrix
) -> TargetParams:
    """Random targets T_j of shape d_j x nbar_b over the given X̄."""
    if nbar_b <= 0 or xbar.shape != (spec.layer_widths[0], nbar_b):
        raise ValueError(
            f"xbar must be {spec.layer_widths[0]}x{nbar_b}, got {'x'.join(map(str, xbar.shape))}"
        )
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    rng = np.random.default_rng(seed)
    targets = tuple(
        truncated_normal(rng, (spec.width(j), nbar_b), sigma)
        for j in range(2, spec.n_layers + 1)
    )
    return TargetParams(targets, xbar)


def project_targets(spec: NetworkSpec, t: TargetParams, lam: float) -> TargetParams:
    """Replace every T_j by the S_j the SCU conversion actually achieves."""
    _, trace = targets_to_weights_scu(spec, t, lam)
    return t.with_targets(trace.sums)
