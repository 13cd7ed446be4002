"""Primitive registry: forward evaluation and reverse (vector-Jacobian) rules.

Each backward rule receives the output adjoint, the operand values and the forward
output, and returns one adjoint per operand (``None`` for non-differentiable operands).
Other packages register their own primitives with ``register_primitive``.
"""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from tensor import Matrix, ShapeError, SingularMatrixError

from .activations import get_activation

Forward = Callable[..., Matrix]
Backward = Callable[..., tuple[Matrix | None, ...]]


@dataclass(frozen=True)
class Primitive:
    name: str
    forward: Forward
    backward: Backward


_REGISTRY: dict[str, Primitive] = {}


def register_primitive(name: str, forward: Forward, backward: Backward) -> None:
    _REGISTRY[name] = Primitive(name, forward, backward)


def get_primitive(name: str) -> Primitive:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(f"Unknown primitive '{name}'") from None


def _same_shape(op: str, a: Matrix, b: Matrix) -> None:
    if a.shape != b.shape:
        raise ShapeError(op, a.shape, b.shape)


# matmul

def _matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    return a @ b


def _matmul_bwd(g: Matrix, ops: list[Matrix], out: Matrix) -> tuple[Matrix, Matrix]:
    a, b = ops
    return g @ b.T, a.T @ g


# add / scale / hadamard / transpose

def _add(a: Matrix, b: Matrix) -> Matrix:
    _same_shape("add", a, b)
    return a + b


def _add_bwd(g: Matrix, ops: list[Matrix], out: Matrix) -> tuple[Matrix, Matrix]:
    return g, g


def _scale(a: Matrix, *, factor: float) -> Matrix:
    return factor * a


def _scale_bwd(g: Matrix, ops: list[Matrix], out: Matrix, *, factor: float) -> tuple[Matrix]:
    return (factor * g,)


def _hadamard(a: Matrix, b: Matrix) -> Matrix:
    _same_shape("hadamard", a, b)
    return a * b


def _hadamard_bwd(g: Matrix, ops: list[Matrix], out: Matrix) -> tuple[Matrix, Matrix]:
    a, b = ops
    return g * b, g * a


def _transpose(a: Matrix) -> Matrix:
    return np.ascontiguousarray(a.T)


def _transpose_bwd(g: Matrix, ops: list[Matrix], out: Matrix) -> tuple[Matrix]:
    return (np.ascontiguousarray(g.T),)


# block concatenation and slicing

def _concat_rows(*blocks: Matrix) -> Matrix:
    if len({b.shape[1] for b in blocks}) != 1:
        raise ShapeError("concat_rows", *(b.shape for b in blocks))
    return np.vstack(blocks)


def _concat_rows_bwd(g: Matrix, ops: list[Matrix], out: Matrix) -> tuple[Matrix, ...]:
    bounds = np.cumsum([b.shape[0] for b in ops])[:-1]
    return tuple(np.split(g, bounds, axis=0))


def _concat_cols(*blocks: Matrix) -> Matrix:
    if len({b.shape[0] for b in blocks}) != 1:
        raise ShapeError("concat_cols", *(b.shape for b in blocks))
    return np.hstack(blocks)


def _concat_cols_bwd(g: Matrix, ops: list[Matrix], out: Matrix) -> tuple[Matrix, ...]:
    bounds = np.cumsum([b.shape[1] for b in ops])[:-1]
    return tuple(np.ascontiguousarray(p) for p in np.split(g, bounds, axis=1))


def _slice_rows(a: Matrix, *, start: int, stop: int) -> Matrix:
    if not 0 <= start < stop <= a.shape[0]:
        raise ShapeError(f"slice_rows[{start}:{stop}]", a.shape)
    return a[start:stop].copy()


def _slice_rows_bwd(
    g: Matrix, ops: list[Matrix], out: Matrix, *, start: int, stop: int
) -> tuple[Matrix]:
    full = np.zeros_like(ops[0])
    full[start:stop] = g
    return (full,)


def _slice_cols(a: Matrix, *, start: int, stop: int) -> Matrix:
    if not 0 <= start < stop <= a.shape[1]:
        raise ShapeError(f"slice_cols[{start}:{stop}]", a.shape)
    return np.ascontiguousarray(a[:, start:stop])


def _slice_cols_bwd(
    g: Matrix, ops: list[Matrix], out: Matrix, *, start: int, stop: int
) -> tuple[Matrix]:
    full = np.zeros_like(ops[0])
    full[:, start:stop] = g
    return (full,)


# activation

def _activation(a: Matrix, *, g: str) -> Matrix:
    return get_activation(g).fn(a)


def _activation_bwd(grad: Matrix, ops: list[Matrix], out: Matrix, *, g: str) -> tuple[Matrix]:
    return (grad * get_activation(g).derivative(ops[0]),)


# spd_inverse: A⁻¹ for symmetric positive-definite A

def _spd_inverse(a: Matrix) -> Matrix:
    if a.shape[0] != a.shape[1]:
        raise ShapeError("spd_inverse", a.shape)
    try:
        factor = linalg.cho_factor(a, lower=True)
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(f"spd_inverse: matrix is not positive definite: {e}") from e
    inv = linalg.cho_solve(factor, np.eye(a.shape[0]))
    return 0.5 * (inv + inv.T)


def _spd_inverse_bwd(g: Matrix, ops: list[Matrix], out: Matrix) -> tuple[Matrix]:
    return (-(out.T @ g @ out.T),)


# losses and reductions

def _softmax(s: Matrix) -> Matrix:
    shifted = s - s.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def _softmax_xent(s: Matrix, *, labels: Matrix) -> Matrix:
    _same_shape("softmax_xent_loss", s, labels)
    shifted = s - s.max(axis=0, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=0, keepdims=True))
    log_p = shifted - log_z
    return np.array([[-float(np.sum(labels * log_p)) / s.shape[1]]])


def _softmax_xent_bwd(
    g: Matrix, ops: list[Matrix], out: Matrix, *, labels: Matrix
) -> tuple[Matrix]:
    s = ops[0]
    return (g[0, 0] * (_softmax(s) - labels) / s.shape[1],)


def _mse(y: Matrix, *, labels: Matrix) -> Matrix:
    _same_shape("mse_loss", y, labels)
    r = y - labels
    return np.array([[float(np.sum(r * r)) / y.shape[1]]])


def _mse_bwd(g: Matrix, ops: list[Matrix], out: Matrix, *, labels: Matrix) -> tuple[Matrix]:
    y = ops[0]
    return (g[0, 0] * 2.0 * (y - labels) / y.shape[1],)


def _reduce_sum(a: Matrix) -> Matrix:
    return np.array([[float(np.sum(a))]])


def _reduce_sum_bwd(g: Matrix, ops: list[Matrix], out: Matrix) -> tuple[Matrix]:
    return (np.full_like(ops[0], g[0, 0]),)


for _name, _fwd, _bwd in (
    ("matmul", _matmul, _matmul_bwd),
    ("add", _add, _add_bwd),
    ("scale", _scale, _scale_bwd),
    ("hadamard", _hadamard, _hadamard_bwd),
    ("transpose", _transpose, _transpose_bwd),
    ("concat_rows", _concat_rows, _concat_rows_bwd),
    ("concat_cols", _concat_cols, _concat_cols_bwd),
    ("slice_rows", _slice_rows, _slice_rows_bwd),
    ("slice_cols", _slice_cols, _slice_cols_bwd),
    ("activation", _activation, _activation_bwd),
    ("spd_inverse", _spd_inverse, _spd_inverse_bwd),
    ("softmax_xent_loss", _softmax_xent, _softmax_xent_bwd),
    ("mse_loss", _mse, _mse_bwd),
    ("reduce_sum", _reduce_sum, _reduce_sum_bwd),
):
    register_primitive(_name, _fwd, _bwd)


def softmax(s: Matrix) -> Matrix:
    """Column-wise softmax with the log-sum-exp shift."""
    return _softmax(s)
