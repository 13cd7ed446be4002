"""Exceptions raised by the linear-algebra kernels."""

import numpy as np


class ShapeError(ValueError):
    """Operand shapes are not conformable."""

    def __init__(self, op: str, *shapes: tuple[int, ...]) -> None:
        self.op = op
        self.shapes = shapes
        rendered = " and ".join("x".join(str(d) for d in s) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {rendered}")


class SingularMatrixError(np.linalg.LinAlgError):
    """A Gramian or SPD system could not be factorized."""


class ArgumentError(ValueError):
    """A scalar argument is outside its valid range."""
