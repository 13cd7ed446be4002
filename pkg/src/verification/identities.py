"""Algebraic identities of the regularized pseudoinverse, checked numerically."""

import numpy as np

from tensor import ArgumentError, Matrix, moore_penrose_pinv, reg_pseudoinverse


def check_lemma_identity(a: Matrix, lam: float) -> float:
    """‖A·A†·(A + λ·(A⁺)ᵀ) - A‖_F, which vanishes for every A when λ > 0."""
    if not lam > 0.0:
        raise ArgumentError(f"lambda must be positive, got {lam}")
    companion = a + lam * moore_penrose_pinv(a).T
    return float(np.linalg.norm(a @ reg_pseudoinverse(a, lam) @ companion - a))


def pseudoinverse_branches(a: Matrix, lam: float) -> tuple[Matrix, Matrix]:
    """Aᵀ(AAᵀ+λI)⁻¹ and (AᵀA+λI)⁻¹Aᵀ, each by its own dense solve."""
    rows, cols = a.shape
    wide = np.linalg.solve(a @ a.T + lam * np.eye(rows), a).T
    tall = np.linalg.solve(a.T @ a + lam * np.eye(cols), a.T)
    return wide, tall


def branch_disagreement(a: Matrix, lam: float) -> float:
    """Frobenius gap between the two pseudoinverse forms relative to ‖A⁺‖_F."""
    wide, tall = pseudoinverse_branches(a, lam)
    scale = float(np.linalg.norm(moore_penrose_pinv(a)))
    gap = float(np.linalg.norm(wide - tall))
    return gap if scale == 0.0 else gap / scale
