import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensor import (
    ArgumentError,
    ShapeError,
    SingularMatrixError,
    as_matrix,
    matmul,
    moore_penrose_pinv,
    reg_pseudoinverse,
    regularized_lstsq,
    spd_solve,
)
from verification import pseudoinverse_branches


def naive_matmul(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i, j] += a[i, k] * b[k, j]
    return out


class TestMatmul:
    def test_identity(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(matmul(np.eye(2), m), m)

    def test_sum(self):
        np.testing.assert_array_equal(matmul(np.ones((1, 2)), np.ones((2, 1))), [[2.0]])

    def test_matches_triple_loop(self, rng):
        a, b = rng.standard_normal((3, 4)), rng.standard_normal((4, 2))
        expected = naive_matmul(a, b)
        assert np.linalg.norm(matmul(a, b) - expected) <= 1e-14 * np.linalg.norm(expected)

    def test_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeError, match="2x3 and 2x3"):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_associative(self, rng):
        a, b, c = (rng.standard_normal(s) for s in [(3, 4), (4, 5), (5, 2)])
        left, right = matmul(matmul(a, b), c), matmul(a, matmul(b, c))
        assert np.linalg.norm(left - right) <= 1e-12 * np.linalg.norm(left)


class TestRegPseudoinverse:
    def test_identity_at_zero_lambda(self):
        np.testing.assert_allclose(reg_pseudoinverse(np.eye(2), 0.0), np.eye(2))

    def test_scalar(self):
        np.testing.assert_allclose(reg_pseudoinverse(np.array([[2.0]]), 2.0), [[1.0 / 3.0]])

    def test_branches_agree(self, rng):
        a = rng.standard_normal((3, 5))
        wide, tall = pseudoinverse_branches(a, 0.001)
        assert np.linalg.norm(wide - tall) <= 1e-10 * np.linalg.norm(wide)
        np.testing.assert_allclose(reg_pseudoinverse(a, 0.001), wide, rtol=1e-10, atol=1e-12)

    def test_tall_matches_wide_transpose(self, rng):
        a = rng.standard_normal((6, 2))
        np.testing.assert_allclose(
            reg_pseudoinverse(a, 0.1), reg_pseudoinverse(a.T, 0.1).T, rtol=1e-10, atol=1e-12
        )

    def test_negative_lambda(self):
        with pytest.raises(ArgumentError):
            reg_pseudoinverse(np.eye(2), -1.0)

    def test_singular_at_zero_lambda(self):
        with pytest.raises(SingularMatrixError):
            reg_pseudoinverse(np.zeros((2, 3)), 0.0)

    def test_residual_shrinks_with_lambda(self, rng):
        a = rng.standard_normal((3, 6))
        residuals = [
            np.linalg.norm(a @ reg_pseudoinverse(a, lam) @ a - a) for lam in (1e-1, 1e-3, 1e-6)
        ]
        assert residuals[0] > residuals[1] > residuals[2]


class TestRegularizedLstsq:
    @pytest.mark.parametrize("shape", [(3, 7), (7, 3)])
    def test_matches_explicit_product(self, rng, shape):
        b = rng.standard_normal(shape)
        t = rng.standard_normal((2, shape[1]))
        np.testing.assert_allclose(
            regularized_lstsq(t, b, 0.01), t @ reg_pseudoinverse(b, 0.01), rtol=1e-9, atol=1e-12
        )

    def test_column_mismatch(self):
        with pytest.raises(ShapeError):
            regularized_lstsq(np.ones((2, 3)), np.ones((2, 4)), 0.1)


class TestMoorePenrose:
    def test_rank_deficient_diagonal(self):
        np.testing.assert_allclose(moore_penrose_pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))

    def test_identity(self):
        np.testing.assert_allclose(moore_penrose_pinv(np.eye(3)), np.eye(3))

    def test_full_rank_is_inverse(self, rng):
        a = rng.standard_normal((2, 2)) + 2.0 * np.eye(2)
        (p, q), (r, s) = a
        inverse = np.array([[s, -q], [-r, p]]) / (p * s - q * r)
        np.testing.assert_allclose(moore_penrose_pinv(a), inverse, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(
        rows=st.integers(1, 6),
        cols=st.integers(1, 6),
        rank=st.integers(1, 6),
        seed=st.integers(0, 2**31 - 1),
    )
    def test_penrose_conditions(self, rows, cols, rank, seed):
        g = np.random.default_rng(seed)
        rank = min(rank, rows, cols)
        a = g.standard_normal((rows, rank)) @ g.standard_normal((rank, cols))
        p = moore_penrose_pinv(a)
        tol = 1e-9 * (1.0 + np.linalg.norm(a)) * (1.0 + np.linalg.norm(p)) ** 2
        assert np.linalg.norm(a @ p @ a - a) <= tol
        assert np.linalg.norm(p @ a @ p - p) <= tol
        assert np.linalg.norm((a @ p).T - a @ p) <= tol
        assert np.linalg.norm((p @ a).T - p @ a) <= tol


class TestSpdSolve:
    def test_identity(self, rng):
        r = rng.standard_normal((3, 2))
        np.testing.assert_allclose(spd_solve(np.eye(3), r), r)

    def test_scaled(self):
        np.testing.assert_allclose(spd_solve(2.0 * np.eye(2), np.array([[4.0], [6.0]])), [[2], [3]])

    def test_residual(self, rng):
        m = rng.standard_normal((4, 4))
        g = m @ m.T + 4.0 * np.eye(4)
        rhs = rng.standard_normal((4, 3))
        assert np.linalg.norm(g @ spd_solve(g, rhs) - rhs) < 1e-10

    def test_not_positive_definite(self):
        with pytest.raises(SingularMatrixError):
            spd_solve(np.diag([1.0, -1.0]), np.ones((2, 1)))

    def test_not_symmetric(self):
        with pytest.raises(SingularMatrixError):
            spd_solve(np.array([[2.0, 1.0], [0.0, 2.0]]), np.ones((2, 1)))


def test_as_matrix_rejects_vectors():
    with pytest.raises(ShapeError):
        as_matrix(np.ones(3))
    assert as_matrix([[1, 2]]).dtype == np.float64
