"""Dense matrix kernels shared by every network type.

All matrices are 2-D float64 numpy arrays. Functions never mutate their inputs.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from .errors import ArgumentError, ShapeError, SingularMatrixError

logger = logging.getLogger(__name__)

Matrix = NDArray[np.float64]

SYMMETRY_TOLERANCE = 1e-10
JITTER_SCALE = 1e-12


def as_matrix(x: ArrayLike) -> Matrix:
    """Coerce to a C-contiguous 2-D float64 array."""
    m = np.ascontiguousarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError("as_matrix", m.shape)
    return m


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product with an explicit shape check."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    return a @ b


def _cholesky(g: Matrix) -> tuple[Matrix, bool]:
    try:
        return linalg.cho_factor(g, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SingularMatrixError(f"matrix of shape {g.shape} is not positive definite: {e}") from e


def spd_solve(g: Matrix, rhs: Matrix) -> Matrix:
    """Solve ``g @ x = rhs`` for symmetric positive-definite ``g`` by Cholesky factorization.

    Raises:
        ShapeError: if ``g`` is not square or ``rhs`` has the wrong row count
        SingularMatrixError: if ``g`` is not symmetric positive definite
    """
    if g.ndim != 2 or g.shape[0] != g.shape[1] or rhs.shape[0] != g.shape[0]:
        raise ShapeError("spd_solve", g.shape, rhs.shape)
    scale = max(1.0, float(np.max(np.abs(g)))) if g.size else 1.0
    if not np.allclose(g, g.T, rtol=0.0, atol=SYMMETRY_TOLERANCE * scale):
        raise SingularMatrixError(f"matrix of shape {g.shape} is not symmetric")
    return linalg.cho_solve(_cholesky(g), rhs)


def _gramian_factor(a: Matrix, lam: float, wide: bool) -> tuple[Matrix, bool]:
    """Cholesky factor of AAᵀ+λI (wide) or AᵀA+λI (tall).

    At λ=0 a failed factorization is retried once with a trace-scaled jitter.
    """
    gram = a @ a.T if wide else a.T @ a
    n = gram.shape[0]
    gram[np.diag_indices(n)] += lam
    try:
        return _cholesky(gram)
    except SingularMatrixError:
        if lam > 0.0:
            raise
        jitter = JITTER_SCALE * float(np.trace(gram)) / n
        if jitter <= 0.0:
            raise
        logger.warning("Singular Gramian at lambda=0, retrying with jitter %.3e", jitter)
        gram[np.diag_indices(n)] += jitter
        return _cholesky(gram)


def _check_lambda(lam: float) -> None:
    if lam < 0.0 or not np.isfinite(lam):
        raise ArgumentError(f"lambda must be a finite nonnegative real, got {lam}")


def _finite(m: Matrix, what: str) -> Matrix:
    if not np.all(np.isfinite(m)):
        raise SingularMatrixError(f"{what} produced non-finite values")
    return m


def reg_pseudoinverse(a: Matrix, lam: float) -> Matrix:
    """Regularized pseudoinverse.

    Uses Aᵀ(AAᵀ+λI)⁻¹ when A is wide (rows < cols) and the Woodbury-equivalent
    (AᵀA+λI)⁻¹Aᵀ otherwise, so the inverted Gramian is always the smaller one.
    """
    _check_lambda(lam)
    rows, cols = a.shape
    if rows < cols:
        factor = _gramian_factor(a, lam, wide=True)
        return _finite(linalg.cho_solve(factor, a).T, "reg_pseudoinverse")
    factor = _gramian_factor(a, lam, wide=False)
    return _finite(linalg.cho_solve(factor, a.T), "reg_pseudoinverse")


def regularized_lstsq(t: Matrix, b: Matrix, lam: float) -> Matrix:
    """Return ``t @ reg_pseudoinverse(b, lam)`` without forming the pseudoinverse."""
    _check_lambda(lam)
    if t.shape[1] != b.shape[1]:
        raise ShapeError("regularized_lstsq", t.shape, b.shape)
    rows, cols = b.shape
    if rows < cols:
        factor = _gramian_factor(b, lam, wide=True)
        w = linalg.cho_solve(factor, b @ t.T).T
    else:
        factor = _gramian_factor(b, lam, wide=False)
        w = linalg.cho_solve(factor, t.T).T @ b.T
    return _finite(np.ascontiguousarray(w), "regularized_lstsq")


def moore_penrose_pinv(a: Matrix) -> Matrix:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values at or below ``max(m, n) * eps * s_max`` are treated as zero.
    """
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    u, s, vt = linalg.svd(a, full_matrices=False)
    cutoff = max(a.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    s_inv = np.zeros_like(s)
    keep = s > cutoff
    s_inv[keep] = 1.0 / s[keep]
    return (vt.T * s_inv) @ u.T
