"""Operation counts for forming W by regularized pseudoinverse, as closed-form formulas.

Inverting an n x n matrix is counted as n³ flops; the cheaper of the two pseudoinverse forms
is assumed, chosen by comparing the input width with the target-space batch width.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

LayerKind = Literal["ffnn_layer", "cnn_layer"]


@dataclass(frozen=True)
class FlopEstimate:
    """``count`` forms W; ``ratio`` also charges S = W X̄ against the weight-space forward pass."""

    count: int
    s_formation: int
    ratio: float


def w_formation_flops(n_i: int, n_o: int, nbar_b: int) -> int:
    if n_i < nbar_b:
        return n_i**3 + 2 * n_i**2 * nbar_b + n_i * n_o * nbar_b
    return nbar_b**3 + 2 * nbar_b**2 * n_i + n_i * n_o * nbar_b


def flop_estimate(kind: LayerKind, dims: Sequence[int], nbar_b: int, n_b: int) -> FlopEstimate:
    """Flops to form one layer's W, and the target-space to weight-space cost ratio.

    Args:
        kind: ``ffnn_layer`` with dims (n_i, n_o), or ``cnn_layer`` with dims
            (kernel_h, kernel_w, in_channels, out_channels, patches_per_image)
        nbar_b: target-space batch width
        n_b: weight-space minibatch width
    """
    if any(d <= 0 for d in (*dims, nbar_b, n_b)):
        raise ValueError(f"dimensions must be positive, got {tuple(dims)}, {nbar_b}, {n_b}")
    if kind == "ffnn_layer":
        n_i, n_o = dims
        count = w_formation_flops(n_i, n_o, nbar_b)
        s_formation = n_i * n_o * nbar_b
        return FlopEstimate(count, s_formation, (count + s_formation) / (n_i * n_o * n_b))
    if kind == "cnn_layer":
        kernel_h, kernel_w, in_channels, out_channels, n_patch = dims
        n_i = kernel_h * kernel_w * in_channels
        count = w_formation_flops(n_i, out_channels, nbar_b * n_patch)
        s_formation = n_i * out_channels * nbar_b * n_patch
        forward = n_i * out_channels * n_b * n_patch
        return FlopEstimate(count, s_formation, (count + s_formation) / forward)
    raise ValueError(f"Unknown layer kind '{kind}'. Available: ffnn_layer, cnn_layer")
