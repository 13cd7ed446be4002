from .errors import ArgumentError, ShapeError, SingularMatrixError
from .kernels import (
    Matrix,
    as_matrix,
    matmul,
    moore_penrose_pinv,
    reg_pseudoinverse,
    regularized_lstsq,
    spd_solve,
)

__all__ = [
    "ArgumentError",
    "Matrix",
    "ShapeError",
    "SingularMatrixError",
    "as_matrix",
    "matmul",
    "moore_penrose_pinv",
    "reg_pseudoinverse",
    "regularized_lstsq",
    "spd_solve",
]
