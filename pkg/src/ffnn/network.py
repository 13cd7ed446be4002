"""Feed-forward network description and its two parameterizations.

Layers are numbered 1..nL; layer 0 is the single always-on bias node. Parameter
tuples are indexed from layer 2, so ``weights[j - 2]`` belongs to layer ``j``.
"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from tensor import Matrix, ShapeError

ActivationName = Literal["tanh", "lrelu"]
HeadName = Literal["softmax_xent", "mse_linear"]


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths d1..dnL plus wiring, activation and output head."""

    layer_widths: tuple[int, ...]
    all_shortcuts: bool = False
    hidden_activation: ActivationName = "tanh"
    output_head: HeadName = "softmax_xent"

    def __post_init__(self) -> None:
        object.__setattr__(self, "layer_widths", tuple(int(d) for d in self.layer_widths))
        if len(self.layer_widths) < 2:
            raise ValueError(f"need at least 2 layers, got {self.layer_widths}")
        if any(d <= 0 for d in self.layer_widths):
            raise ValueError(f"layer widths must be positive, got {self.layer_widths}")
        if self.hidden_activation not in ("tanh", "lrelu"):
            raise ValueError(f"unsupported hidden activation '{self.hidden_activation}'")
        if self.output_head not in ("softmax_xent", "mse_linear"):
            raise ValueError(f"unsupported output head '{self.output_head}'")

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths)

    def width(self, k: int) -> int:
        return 1 if k == 0 else self.layer_widths[k - 1]

    def inputs_to(self, j: int) -> tuple[int, ...]:
        """Layers feeding layer ``j`` in stacking order, bias first."""
        if self.all_shortcuts:
            return tuple(range(j))
        return (0, j - 1)

    def stack_width(self, j: int) -> int:
        return sum(self.width(k) for k in self.inputs_to(j))

    def activation_of(self, j: int) -> str:
        # the output nonlinearity (softmax) lives inside the loss
        return "identity" if j == self.n_layers else self.hidden_activation

    def weight_shapes(self) -> list[tuple[int, int]]:
        return [(self.width(j), self.stack_width(j)) for j in range(2, self.n_layers + 1)]

    def hidden_layers(self) -> range:
        return range(2, self.n_layers)


@dataclass(frozen=True)
class WeightParams:
    """Stacked weights W̃2..W̃nL, bias column first."""

    weights: tuple[Matrix, ...]

    def check(self, spec: NetworkSpec) -> None:
        expected = spec.weight_shapes()
        actual = [w.shape for w in self.weights]
        if actual != expected:
            raise ShapeError("WeightParams", *actual, *expected)

    def as_list(self) -> list[Matrix]:
        return list(self.weights)


@dataclass(frozen=True)
class TargetParams:
    """Targets T2..TnL over the fixed target-space input X̄."""

    targets: tuple[Matrix, ...]
    xbar: Matrix

    def __post_init__(self) -> None:
        xbar = np.array(self.xbar, dtype=np.float64)
        xbar.flags.writeable = False
        object.__setattr__(self, "xbar", xbar)
        columns = {t.shape[1] for t in self.targets}
        if columns and columns != {xbar.shape[1]}:
            raise ShapeError("TargetParams", xbar.shape, *(t.shape for t in self.targets))

    @property
    def nbar_b(self) -> int:
        return int(self.xbar.shape[1])

    def check(self, spec: NetworkSpec) -> None:
        expected = [(spec.width(j), self.nbar_b) for j in range(2, spec.n_layers + 1)]
        actual = [t.shape for t in self.targets]
        if actual != expected or self.xbar.shape[0] != spec.layer_widths[0]:
            raise ShapeError("TargetParams", *actual, *expected)

    def with_targets(self, targets: list[Matrix] | tuple[Matrix, ...]) -> "TargetParams":
        return TargetParams(tuple(targets), self.xbar)

    def as_list(self) -> list[Matrix]:
        return list(self.targets)


@dataclass(frozen=True)
class ForwardTrace:
    """Work-space matrices of one pass.

    ``activations[k]`` is A_k for k = 1..nL (index 0 holds the bias row); ``sums[j - 2]``
    is S_j. ``masks[j - 2]`` is the dropout mask applied to hidden A_j, if any.
    """

    sums: tuple[Matrix, ...]
    activations: tuple[Matrix, ...]
    masks: tuple[Matrix | None, ...] = field(default=())

    @property
    def output(self) -> Matrix:
        return self.sums[-1]

    def sum_of(self, j: int) -> Matrix:
        return self.sums[j - 2]

    def mask_of(self, j: int) -> Matrix | None:
        return self.masks[j - 2] if self.masks else None

    def stack(self, spec: NetworkSpec, j: int) -> Matrix:
        """B̃_j: bias row and every activation feeding layer ``j``."""
        return np.vstack([self.activations[k] for k in spec.inputs_to(j)])


def bias_row(n: int) -> Matrix:
    return np.ones((1, n))
