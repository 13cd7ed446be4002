"""Reverse-mode differentiation tape over matrix primitives.

A ``Tape`` records every primitive application as a node holding its forward value.
Operand ids are always smaller than the node id, so a single reverse sweep over the
node list visits nodes in a valid topological order.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from tensor import Matrix, ShapeError, as_matrix

from .primitives import get_primitive


@dataclass(frozen=True)
class Node:
    primitive: str
    operands: tuple[int, ...]
    value: Matrix
    params: dict[str, Any] = field(default_factory=dict)
    requires_grad: bool = False


class Var:
    """Handle to a node on a tape."""

    __slots__ = ("tape", "id")
    __array_ufunc__ = None

    def __init__(self, tape: "Tape", node_id: int) -> None:
        self.tape = tape
        self.id = node_id

    @property
    def value(self) -> Matrix:
        return self.tape.nodes[self.id].value

    @property
    def shape(self) -> tuple[int, int]:
        rows, cols = self.value.shape
        return rows, cols

    @property
    def T(self) -> "Var":  # noqa: N802
        return self.tape.apply("transpose", self)

    def _lift(self, other: "Var | Matrix") -> "Var":
        return other if isinstance(other, Var) else self.tape.constant(other)

    def __matmul__(self, other: "Var | Matrix") -> "Var":
        return self.tape.apply("matmul", self, self._lift(other))

    def __rmatmul__(self, other: Matrix) -> "Var":
        return self.tape.apply("matmul", self._lift(other), self)

    def __add__(self, other: "Var | Matrix") -> "Var":
        return self.tape.apply("add", self, self._lift(other))

    __radd__ = __add__

    def __neg__(self) -> "Var":
        return self.tape.apply("scale", self, factor=-1.0)

    def __sub__(self, other: "Var | Matrix") -> "Var":
        return self + (-self._lift(other))

    def __rsub__(self, other: Matrix) -> "Var":
        return self._lift(other) + (-self)

    def __mul__(self, other: "Var | Matrix | float") -> "Var":
        if isinstance(other, int | float):
            return self.tape.apply("scale", self, factor=float(other))
        return self.tape.apply("hadamard", self, self._lift(other))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Var(id={self.id}, shape={self.value.shape})"


class Tape:
    """Append-only record of a computation; confined to one thread."""

    def __init__(self) -> None:
        self.nodes: list[Node] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def _push(self, node: Node) -> Var:
        self.nodes.append(node)
        return Var(self, len(self.nodes) - 1)

    def leaf(self, value: Matrix) -> Var:
        """A differentiable input."""
        return self._push(Node("leaf", (), as_matrix(value).copy(), requires_grad=True))

    def constant(self, value: Matrix) -> Var:
        """A non-differentiable input."""
        return self._push(Node("constant", (), as_matrix(value)))

    def apply(self, primitive: str, *operands: Var, **params: Any) -> Var:
        """Evaluate ``primitive`` on the operands and record the result."""
        prim = get_primitive(primitive)
        for v in operands:
            if v.tape is not self:
                raise ValueError(f"{primitive}: operand {v!r} belongs to another tape")
        value = prim.forward(*(v.value for v in operands), **params)
        requires_grad = any(self.nodes[v.id].requires_grad for v in operands)
        node = Node(primitive, tuple(v.id for v in operands), value, params, requires_grad)
        return self._push(node)


def tape_apply(tape: Tape, primitive: str, operands: Sequence[Var], **params: Any) -> Var:
    return tape.apply(primitive, *operands, **params)


def vjp(tape: Tape, outputs: Sequence[Var], cotangents: Sequence[Matrix]) -> dict[int, Matrix]:
    """Propagate ``cotangents`` seeded on ``outputs`` back through the tape.

    Returns adjoints for every node that depends on a leaf.
    """
    adjoints: dict[int, Matrix] = {}
    for out, seed in zip(outputs, cotangents, strict=True):
        if seed.shape != out.value.shape:
            raise ShapeError("vjp seed", seed.shape, out.value.shape)
        adjoints[out.id] = adjoints.get(out.id, 0.0) + seed
    start = max(v.id for v in outputs)
    for node_id in range(start, -1, -1):
        node = tape.nodes[node_id]
        adj = adjoints.get(node_id)
        if adj is None or not node.requires_grad or not node.operands:
            continue
        values = [tape.nodes[i].value for i in node.operands]
        grads = get_primitive(node.primitive).backward(adj, values, node.value, **node.params)
        for operand_id, g in zip(node.operands, grads, strict=True):
            if g is None or not tape.nodes[operand_id].requires_grad:
                continue
            if operand_id in adjoints:
                adjoints[operand_id] = adjoints[operand_id] + g
            else:
                adjoints[operand_id] = g
    return adjoints


def backward(tape: Tape, loss: Var, wrt: Sequence[Var] | None = None) -> dict[int, Matrix]:
    """Reverse sweep from a scalar loss.

    Args:
        tape: the tape holding ``loss``
        loss: a 1x1 node
        wrt: leaves whose adjoints must be present in the result (zeros when unreachable)

    Returns:
        Mapping from node id to adjoint matrix
    """
    if loss.value.shape != (1, 1):
        raise ShapeError("backward (loss must be 1x1)", loss.value.shape)
    adjoints = vjp(tape, [loss], [np.ones((1, 1))])
    for v in wrt or ():
        adjoints.setdefault(v.id, np.zeros_like(v.value))
    return adjoints


def gradients(tape: Tape, loss: Var, wrt: Sequence[Var]) -> list[Matrix]:
    """Adjoints of ``wrt`` in order."""
    adjoints = backward(tape, loss, wrt)
    return [adjoints[v.id] for v in wrt]
