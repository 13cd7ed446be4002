"""Convolutional networks in both parameterizations.

A network is a chain of conv blocks (convolution, activation, optional dropout, optional
max-pooling) followed by dense layers on the flattened maps. In target space each layer
owns a target matrix at its pre-activation resolution: out_channels x (n̄_b·H·W) for a conv
layer and d x n̄_b for a dense one.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from autodiff import Tape, Var, composed, gradients
from ffnn.dropout import dropout_masks
from ffnn.dynamics import accuracy, init_weight_matrices
from ffnn.mapping import Untangling, truncated_normal
from tensor import Matrix, ShapeError

from .geometry import ConvLayerSpec, FeatureMap

logger = logging.getLogger(__name__)

LayerFn = Callable[[int, Var], Var]


@dataclass(frozen=True)
class CnnSpec:
    in_channels: int
    height: int
    width: int
    conv_layers: tuple[ConvLayerSpec, ...]
    dense_widths: tuple[int, ...]
    activation: str = "lrelu"

    def __post_init__(self) -> None:
        object.__setattr__(self, "conv_layers", tuple(self.conv_layers))
        object.__setattr__(self, "dense_widths", tuple(int(d) for d in self.dense_widths))
        if not self.dense_widths or any(d <= 0 for d in self.dense_widths):
            raise ValueError(f"need at least one positive dense width, got {self.dense_widths}")
        channels = self.in_channels
        for conv in self.conv_layers:
            if conv.in_channels != channels:
                raise ValueError(
                    f"conv layer expects {conv.in_channels} channels, previous gives {channels}"
                )
            channels = conv.out_channels
        self.conv_sides()

    @classmethod
    def from_triples(
        cls,
        in_channels: int,
        side: int,
        triples: Sequence[tuple[int, int, int]],
        dense_widths: Sequence[int],
        activation: str = "lrelu",
    ) -> "CnnSpec":
        """From (kernel, channels, pool) triples, square kernels."""
        convs = []
        channels = in_channels
        for kernel, out_channels, pool in triples:
            convs.append(ConvLayerSpec(kernel, kernel, channels, out_channels, pool))
            channels = out_channels
        return cls(in_channels, side, side, tuple(convs), tuple(dense_widths), activation)

    def conv_sides(self) -> list[tuple[int, int]]:
        """Spatial size seen by each conv layer, plus the size after the last block."""
        sides = [(self.height, self.width)]
        for conv in self.conv_layers:
            h, w = sides[-1]
            sides.append((conv.pooled_side(h), conv.pooled_side(w)))
        return sides

    @property
    def flat_width(self) -> int:
        h, w = self.conv_sides()[-1]
        channels = self.conv_layers[-1].out_channels if self.conv_layers else self.in_channels
        return channels * h * w

    @property
    def n_layers(self) -> int:
        return len(self.conv_layers) + len(self.dense_widths)

    def weight_shapes(self) -> list[tuple[int, int]]:
        shapes = [conv.kernel_shape for conv in self.conv_layers]
        fan_in = self.flat_width
        for d in self.dense_widths:
            shapes.append((d, 1 + fan_in))
            fan_in = d
        return shapes

    def target_shapes(self, n: int) -> list[tuple[int, int]]:
        sides = self.conv_sides()
        shapes = [
            (conv.out_channels, n * h * w)
            for conv, (h, w) in zip(self.conv_layers, sides, strict=False)
        ]
        return shapes + [(d, n) for d in self.dense_widths]

    def drops(self, index: int) -> bool:
        """Dropout sits on even-numbered conv layers and every dense layer but the last."""
        n_conv = len(self.conv_layers)
        if index < n_conv:
            return (index + 1) % 2 == 0
        return index < self.n_layers - 1


@dataclass(frozen=True)
class CnnTargetParams:
    targets: tuple[Matrix, ...]
    xbar: FeatureMap

    def __post_init__(self) -> None:
        data = np.array(self.xbar.data, dtype=np.float64)
        data.flags.writeable = False
        object.__setattr__(
            self, "xbar", FeatureMap(data, self.xbar.batch, self.xbar.height, self.xbar.width)
        )

    @property
    def nbar_b(self) -> int:
        return self.xbar.batch

    def check(self, spec: CnnSpec) -> None:
        expected = spec.target_shapes(self.nbar_b)
        actual = [t.shape for t in self.targets]
        if actual != expected:
            raise ShapeError("CnnTargetParams", *actual, *expected)

    def with_targets(self, targets: Sequence[Matrix]) -> "CnnTargetParams":
        return CnnTargetParams(tuple(targets), self.xbar)

    def as_list(self) -> list[Matrix]:
        return list(self.targets)


def _check_input(spec: CnnSpec, x: FeatureMap) -> None:
    if (x.channels, x.height, x.width) != (spec.in_channels, spec.height, spec.width):
        raise ShapeError(
            "cnn input",
            (x.channels, x.height, x.width),
            (spec.in_channels, spec.height, spec.width),
        )


def _run(
    spec: CnnSpec,
    tape: Tape,
    x: FeatureMap,
    layer: LayerFn,
    masks: Sequence[Matrix | None] | None,
) -> tuple[Var, list[Var]]:
    """Thread ``x`` through every layer; ``layer(index, stack)`` returns the carried sum."""
    _check_input(spec, x)
    n, h, w = x.batch, x.height, x.width
    a = tape.constant(x.data)
    sums = []
    for index, conv in enumerate(spec.conv_layers):
        patches = tape.apply(
            "im2col",
            a,
            batch=n,
            height=h,
            width=w,
            kernel_h=conv.kernel_h,
            kernel_w=conv.kernel_w,
        )
        s = layer(index, patches)
        sums.append(s)
        a = composed.activation(s, spec.activation)
        if masks is not None and masks[index] is not None:
            a = a * masks[index]
        if conv.pool_k > 1:
            a = tape.apply("maxpool", a, batch=n, height=h, width=w, k=conv.pool_k)
            h, w = h // conv.pool_k, w // conv.pool_k
    a = tape.apply("flatten_map", a, batch=n, area=h * w)
    ones = tape.constant(np.ones((1, n)))
    last = spec.n_layers - 1
    for index in range(len(spec.conv_layers), spec.n_layers):
        s = layer(index, composed.concat_rows([ones, a]))
        sums.append(s)
        if index == last:
            break
        a = composed.activation(s, spec.activation)
        if masks is not None and masks[index] is not None:
            a = a * masks[index]
    return sums[-1], sums


def taped_cnn_forward(
    spec: CnnSpec,
    weight_vars: Sequence[Var],
    x: FeatureMap,
    masks: Sequence[Matrix | None] | None = None,
) -> Var:
    """Logits of the weight-space network over ``x``."""
    tape = weight_vars[0].tape
    logits, _ = _run(spec, tape, x, lambda index, b: weight_vars[index] @ b, masks)
    return logits


def taped_cnn_weights(
    spec: CnnSpec,
    target_vars: Sequence[Var],
    xbar: FeatureMap,
    lam: float,
    untangling: Untangling = "scu",
    masks: Sequence[Matrix | None] | None = None,
) -> tuple[list[Var], list[Var]]:
    """Per-layer W = T·B† over X̄.

    Returns the weights and the sums carried forward (achieved for SCU, the targets for OCU).
    """
    tape = target_vars[0].tape
    weights: list[Var] = []

    def solve(index: int, b: Var) -> Var:
        target = target_vars[index]
        w = composed.lstsq_weights(target, b, lam)
        weights.append(w)
        return w @ b if untangling == "scu" else target

    _, carried = _run(spec, tape, xbar, solve, masks)
    return weights, carried


def cnn_targets_to_weights(
    spec: CnnSpec,
    t: CnnTargetParams,
    lam: float,
    untangling: Untangling = "scu",
    masks: Sequence[Matrix | None] | None = None,
) -> list[Matrix]:
    t.check(spec)
    tape = Tape()
    weights, _ = taped_cnn_weights(
        spec, [tape.constant(target) for target in t.targets], t.xbar, lam, untangling, masks
    )
    return [w.value for w in weights]


def cnn_forward(
    spec: CnnSpec,
    weights: Sequence[Matrix],
    x: FeatureMap,
    masks: Sequence[Matrix | None] | None = None,
) -> Matrix:
    tape = Tape()
    return taped_cnn_forward(spec, [tape.constant(w) for w in weights], x, masks).value


def _loss(y: Var, labels: Matrix) -> Var:
    return composed.softmax_xent_loss(y, labels)


def cnn_loss_and_weight_gradient(
    spec: CnnSpec,
    weights: Sequence[Matrix],
    x: FeatureMap,
    labels: Matrix,
    masks: Sequence[Matrix | None] | None = None,
) -> tuple[float, list[Matrix]]:
    tape = Tape()
    weight_vars = [tape.leaf(w) for w in weights]
    loss = _loss(taped_cnn_forward(spec, weight_vars, x, masks), labels)
    return float(loss.value[0, 0]), gradients(tape, loss, weight_vars)


def cnn_loss_and_target_gradient(
    spec: CnnSpec,
    t: CnnTargetParams,
    lam: float,
    x: FeatureMap,
    labels: Matrix,
    untangling: Untangling = "scu",
    x_masks: Sequence[Matrix | None] | None = None,
    xbar_masks: Sequence[Matrix | None] | None = None,
) -> tuple[float, list[Matrix]]:
    """L'(T) over the minibatch ``x`` and dL'/dT by one reverse sweep."""
    t.check(spec)
    tape = Tape()
    target_vars = [tape.leaf(target) for target in t.targets]
    weights, _ = taped_cnn_weights(spec, target_vars, t.xbar, lam, untangling, xbar_masks)
    loss = _loss(taped_cnn_forward(spec, weights, x, x_masks), labels)
    return float(loss.value[0, 0]), gradients(tape, loss, target_vars)


def cnn_loss_and_accuracy(
    spec: CnnSpec,
    weights: Sequence[Matrix],
    x: FeatureMap,
    labels: Matrix,
    chunk: int = 500,
) -> tuple[float, float]:
    """Mean loss and accuracy, evaluated ``chunk`` images at a time."""
    total_loss, hits = 0.0, 0.0
    for start in range(0, x.batch, chunk):
        stop = min(start + chunk, x.batch)
        y = cnn_forward(spec, weights, x.columns(start, stop))
        part = labels[:, start:stop]
        tape = Tape()
        total_loss += float(_loss(tape.constant(y), part).value[0, 0]) * (stop - start)
        hits += accuracy(y, part) * (stop - start)
    return total_loss / x.batch, hits / x.batch


def cnn_dropout_masks(
    spec: CnnSpec, n: int, rate: float, seed: int | np.random.Generator
) -> list[Matrix | None]:
    """Masks for every layer; ``None`` where the layer does not drop."""
    if rate == 0.0:
        return [None] * spec.n_layers
    rng = np.random.default_rng(seed)
    masks: list[Matrix | None] = []
    for index, shape in enumerate(spec.target_shapes(n)):
        masks.append(dropout_masks([shape], rate, rng)[0] if spec.drops(index) else None)
    return masks


def init_cnn_weights(spec: CnnSpec, seed: int | np.random.Generator) -> list[Matrix]:
    return init_weight_matrices(spec.weight_shapes(), seed, "he")


def init_cnn_targets(
    spec: CnnSpec, xbar: FeatureMap, sigma: float, seed: int | np.random.Generator
) -> CnnTargetParams:
    _check_input(spec, xbar)
    rng = np.random.default_rng(seed)
    shapes = spec.target_shapes(xbar.batch)
    targets = tuple(truncated_normal(rng, shape, sigma) for shape in shapes)
    return CnnTargetParams(targets, xbar)


def project_cnn_targets(spec: CnnSpec, t: CnnTargetParams, lam: float) -> CnnTargetParams:
    """Replace each target by the sum the SCU weights achieve over X̄."""
    t.check(spec)
    tape = Tape()
    _, sums = taped_cnn_weights(spec, [tape.constant(x) for x in t.targets], t.xbar, lam)
    logger.debug("projected %d cnn target layers", len(sums))
    return t.with_targets([s.value for s in sums])
