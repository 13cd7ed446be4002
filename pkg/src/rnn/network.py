"""Recurrent network description and rolled-up target parameters.

Layer 1 takes the input, layer 2 holds the previous step's context-layer activations, and
layers 3..nL compute. Layer 3 sees [bias; input; feedback]; every later layer sees
[bias; previous layer]. Weights are indexed from layer 3, so ``weights[j - 3]`` is W̃_j.
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from tensor import Matrix, ShapeError


@dataclass(frozen=True)
class RnnSpec:
    """Widths of layers 1 and 3..nL plus the index of the context layer.

    ``context_layer`` defaults to nL - 1, the last hidden layer.
    """

    input_width: int
    hidden_widths: tuple[int, ...]
    output_width: int
    context_layer: int | None = None
    activation: str = "tanh"
    head: str = "softmax_xent"

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden_widths", tuple(int(d) for d in self.hidden_widths))
        widths = (self.input_width, *self.hidden_widths, self.output_width)
        if any(d <= 0 for d in widths):
            raise ValueError(f"layer widths must be positive, got {widths}")
        if self.context_layer is None:
            object.__setattr__(self, "context_layer", max(3, self.n_layers - 1))
        if not 3 <= self.context_layer <= self.n_layers:  # type: ignore[operator]
            raise ValueError(
                f"context layer must lie in 3..{self.n_layers}, got {self.context_layer}"
            )
        if self.activation != "tanh" or self.head not in ("softmax_xent", "mse_linear"):
            raise ValueError(f"unsupported activation/head {self.activation}/{self.head}")

    @property
    def n_layers(self) -> int:
        return 3 + len(self.hidden_widths)

    @property
    def c_l(self) -> int:
        assert self.context_layer is not None
        return self.context_layer

    def width(self, k: int) -> int:
        if k == 0:
            return 1
        if k == 1:
            return self.input_width
        if k == 2:
            return self.width(self.c_l)
        if k == self.n_layers:
            return self.output_width
        return self.hidden_widths[k - 3]

    @property
    def exit_widths(self) -> tuple[int, ...]:
        return tuple(self.width(k) for k in range(self.c_l + 1, self.n_layers))

    def inputs_to(self, j: int) -> tuple[int, ...]:
        return (0, 1, 2) if j == 3 else (0, j - 1)

    def stack_width(self, j: int) -> int:
        """Rows of B̃_j; also the side of the rolled-up Gramian, whatever the sequence length."""
        return sum(self.width(k) for k in self.inputs_to(j))

    def activation_of(self, j: int) -> str:
        return "identity" if j == self.n_layers else self.activation

    def layers(self) -> range:
        return range(3, self.n_layers + 1)

    def weight_shapes(self) -> list[tuple[int, int]]:
        return [(self.width(j), self.stack_width(j)) for j in self.layers()]

    def check_weights(self, weights: Sequence[Matrix]) -> None:
        actual = [w.shape for w in weights]
        if actual != self.weight_shapes():
            raise ShapeError("rnn weights", *actual, *self.weight_shapes())

    def check_sequence(self, x_seq: Sequence[Matrix]) -> int:
        """Validate an input sequence and return its batch width."""
        if not x_seq:
            raise ValueError("input sequence is empty")
        shapes = {x.shape for x in x_seq}
        if len(shapes) != 1 or x_seq[0].shape[0] != self.input_width:
            raise ShapeError("rnn input sequence", *shapes)
        return int(x_seq[0].shape[1])


@dataclass(frozen=True)
class RnnTargetParams:
    """Rolled-up targets T_j^(:) of shape d_j x (n̄_t·n̄_b) for j = 3..nL.

    Step ``t`` (0-based) of layer j is the column block ``[t·n̄_b, (t+1)·n̄_b)``.
    """

    targets: tuple[Matrix, ...]
    xbar: tuple[Matrix, ...]

    def __post_init__(self) -> None:
        frozen = []
        for x in self.xbar:
            x = np.array(x, dtype=np.float64)
            x.flags.writeable = False
            frozen.append(x)
        object.__setattr__(self, "xbar", tuple(frozen))
        if not frozen or len({x.shape for x in frozen}) != 1:
            raise ShapeError("RnnTargetParams xbar", *(x.shape for x in frozen))
        width = self.nbar_t * self.nbar_b
        if any(t.shape[1] != width for t in self.targets):
            raise ShapeError("RnnTargetParams", *(t.shape for t in self.targets))

    @property
    def nbar_t(self) -> int:
        return len(self.xbar)

    @property
    def nbar_b(self) -> int:
        return int(self.xbar[0].shape[1])

    def step(self, j: int, t: int) -> Matrix:
        n = self.nbar_b
        return self.targets[j - 3][:, t * n : (t + 1) * n]

    def check(self, spec: RnnSpec) -> None:
        expected = [(spec.width(j), self.nbar_t * self.nbar_b) for j in spec.layers()]
        actual = [t.shape for t in self.targets]
        if actual != expected or self.xbar[0].shape[0] != spec.input_width:
            raise ShapeError("RnnTargetParams", *actual, *expected)

    def with_targets(self, targets: Sequence[Matrix]) -> "RnnTargetParams":
        return RnnTargetParams(tuple(targets), self.xbar)

    def as_list(self) -> list[Matrix]:
        return list(self.targets)


@dataclass(frozen=True)
class RnnTrace:
    """Per-layer, per-step sums and activations of one unrolled pass."""

    sums: dict[int, tuple[Matrix, ...]]
    activations: dict[int, tuple[Matrix, ...]]

    @property
    def n_steps(self) -> int:
        return len(self.activations[1])

    def rolled_sums(self, j: int) -> Matrix:
        return np.hstack(self.sums[j])
