"""Operations composed from tape primitives."""

import numpy as np

from tensor import ArgumentError

from .tape import Var


def reg_pseudoinverse(b: Var, lam: float) -> Var:
    """Regularized pseudoinverse built from transpose/matmul/add/spd_inverse.

    The inverse is taken on the smaller Gramian, matching ``tensor.reg_pseudoinverse``.
    """
    if lam < 0.0:
        raise ArgumentError(f"lambda must be nonnegative, got {lam}")
    tape = b.tape
    rows, cols = b.shape
    bt = b.T
    if rows < cols:
        gram = b @ bt + tape.constant(lam * np.eye(rows))
        return bt @ tape.apply("spd_inverse", gram)
    gram = bt @ b + tape.constant(lam * np.eye(cols))
    return tape.apply("spd_inverse", gram) @ bt


def lstsq_weights(t: Var, b: Var, lam: float) -> Var:
    """W = T·B† on the tape."""
    return t @ reg_pseudoinverse(b, lam)


def activation(x: Var, g: str) -> Var:
    return x.tape.apply("activation", x, g=g)


def concat_rows(blocks: list[Var]) -> Var:
    if len(blocks) == 1:
        return blocks[0]
    return blocks[0].tape.apply("concat_rows", *blocks)


def concat_cols(blocks: list[Var]) -> Var:
    if len(blocks) == 1:
        return blocks[0]
    return blocks[0].tape.apply("concat_cols", *blocks)


def slice_cols(x: Var, start: int, stop: int) -> Var:
    return x.tape.apply("slice_cols", x, start=start, stop=stop)


def slice_rows(x: Var, start: int, stop: int) -> Var:
    return x.tape.apply("slice_rows", x, start=start, stop=stop)


def softmax_xent_loss(s: Var, labels: np.ndarray) -> Var:
    return s.tape.apply("softmax_xent_loss", s, labels=labels)


def mse_loss(y: Var, labels: np.ndarray) -> Var:
    return y.tape.apply("mse_loss", y, labels=labels)


def reduce_sum(x: Var) -> Var:
    return x.tape.apply("reduce_sum", x)
