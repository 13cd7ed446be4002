import numpy as np
import pytest

from ffnn import NetworkSpec, forward, init_targets, targets_to_weights
from tensor import ArgumentError
from verification import (
    JacobianTooLargeError,
    NonFiniteLossError,
    actual_weight_step,
    branch_disagreement,
    check_lemma_identity,
    finite_diff_gradient,
    first_order_slope,
    flop_estimate,
    gradient_triangle,
    max_abs,
    preconditioner_step,
    pseudoinverse_branches,
    random_ffnn_problem,
    relative_error,
    run_verification_suites,
    target_jacobian,
    w_formation_flops,
)


class TestFiniteDifferences:
    def test_square(self):
        x = np.array([[1.0, -2.0], [0.5, 3.0]])
        (grad,) = finite_diff_gradient(lambda ps: float(np.sum(ps[0] ** 2)), [x])
        np.testing.assert_allclose(grad, 2.0 * x, atol=1e-8)

    def test_constant_has_zero_gradient(self):
        grads = finite_diff_gradient(lambda ps: 4.0, [np.ones((2, 2)), np.ones((1, 3))])
        assert max_abs(grads) == 0.0

    def test_leaves_parameters_untouched(self):
        x = np.arange(4.0).reshape(2, 2)
        finite_diff_gradient(lambda ps: float(np.sum(np.sin(ps[0]))), [x])
        np.testing.assert_array_equal(x, np.arange(4.0).reshape(2, 2))

    @pytest.mark.parametrize("h", [0.0, -1e-5])
    def test_rejects_nonpositive_step(self, h):
        with pytest.raises(ArgumentError):
            finite_diff_gradient(lambda ps: 0.0, [np.ones((1, 1))], h)

    def test_non_finite_loss(self):
        with pytest.raises(NonFiniteLossError):
            finite_diff_gradient(lambda ps: float("nan"), [np.ones((1, 1))])

    def test_error_measures(self):
        a = [np.array([[3.0, 4.0]])]
        assert relative_error(a, a) == 0.0
        assert relative_error([np.zeros((1, 2))], [np.zeros((1, 2))]) == 0.0
        assert relative_error(a, [np.zeros((1, 2))]) == 1.0
        assert max_abs([np.array([[-7.0, 2.0]]), np.zeros((0, 0))]) == 7.0


class TestPseudoinverseIdentities:
    @pytest.mark.parametrize("shape", [(3, 5), (5, 3), (4, 4), (1, 6)])
    @pytest.mark.parametrize("lam", [1e-3, 0.1, 10.0])
    def test_lemma_identity(self, rng, shape, lam):
        a = rng.standard_normal(shape)
        assert check_lemma_identity(a, lam) < 1e-9 * (1.0 + np.linalg.norm(a))

    def test_lemma_on_rank_deficient_matrix(self, rng):
        a = rng.standard_normal((5, 2)) @ rng.standard_normal((2, 6))
        assert check_lemma_identity(a, 0.01) < 1e-8 * (1.0 + np.linalg.norm(a))

    def test_lemma_needs_positive_lambda(self, rng):
        with pytest.raises(ArgumentError):
            check_lemma_identity(rng.standard_normal((2, 2)), 0.0)

    def test_branches_agree(self, rng):
        a = rng.standard_normal((3, 7))
        wide, tall = pseudoinverse_branches(a, 0.1)
        assert wide.shape == tall.shape == (7, 3)
        assert branch_disagreement(a, 0.1) < 1e-12

    def test_zero_matrix(self):
        assert branch_disagreement(np.zeros((2, 3)), 0.1) == 0.0


class TestFlops:
    def test_small_layer_pin(self):
        estimate = flop_estimate("ffnn_layer", (2, 3), 5, 5)
        assert estimate.count == 78
        assert estimate.s_formation == 30
        assert estimate.ratio == pytest.approx((78 + 30) / 30)

    def test_picks_the_cheaper_branch(self):
        assert w_formation_flops(10, 4, 6) == 6**3 + 2 * 36 * 10 + 40 * 6
        assert w_formation_flops(3, 2, 100) == 27 + 2 * 9 * 100 + 6 * 100

    def test_conv_layer_counts_every_patch(self):
        estimate = flop_estimate("cnn_layer", (3, 3, 1, 8, 784), 100, 100)
        assert estimate.count == w_formation_flops(9, 8, 78400)
        assert estimate.ratio == pytest.approx(estimate.count / (72 * 78400) + 1.0)

    @pytest.mark.parametrize("width", [10, 50, 100])
    @pytest.mark.parametrize("n_b", [500, 1000])
    def test_square_layer_costs_about_four_forward_passes(self, width, n_b):
        nbar_b = 1000
        estimate = flop_estimate("ffnn_layer", (width, width), nbar_b, n_b)
        assert estimate.count <= 4 * width**2 * nbar_b
        assert estimate.ratio == pytest.approx(4 * nbar_b / n_b, rel=0.05)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            flop_estimate("ffnn_layer", (0, 3), 5, 5)
        with pytest.raises(ValueError):
            flop_estimate("rnn_layer", (2, 3), 5, 5)  # type: ignore[arg-type]


@pytest.fixture
def tiny_problem(rng):
    spec = NetworkSpec((2, 3, 2), output_head="mse_linear")
    xbar = rng.standard_normal((2, 4))
    t = init_targets(spec, 4, 1.0, rng, xbar=xbar)
    x = rng.standard_normal((2, 5))
    labels = rng.standard_normal((2, 5))
    return spec, t, x, labels


class TestPreconditioner:
    def test_jacobian_shape_and_psd_product(self, tiny_problem):
        spec, t, _, _ = tiny_problem
        jacobian = target_jacobian(spec, t, 0.1)
        assert jacobian.shape == (9 + 8, 20)
        eigenvalues = np.linalg.eigvalsh(jacobian @ jacobian.T)
        assert eigenvalues.min() > -1e-10

    def test_jacobian_cap(self, tiny_problem):
        spec, t, _, _ = tiny_problem
        with pytest.raises(JacobianTooLargeError):
            target_jacobian(spec, t, 0.1, cap=10)

    def test_zero_weight_gradient_predicts_no_step(self, tiny_problem):
        spec, t, x, _ = tiny_problem
        y = forward(spec, targets_to_weights(spec, t, 0.1), x).output
        assert max_abs(preconditioner_step(spec, t, 0.1, x, y, 0.01)) < 1e-14
        assert max_abs(actual_weight_step(spec, t, 0.1, x, y, 0.01)) < 1e-14

    def test_rejects_nonpositive_eta(self, tiny_problem):
        spec, t, x, labels = tiny_problem
        with pytest.raises(ArgumentError):
            preconditioner_step(spec, t, 0.1, x, labels, 0.0)

    def test_first_order_agreement(self, tiny_problem):
        spec, t, x, labels = tiny_problem
        assert first_order_slope(spec, t, 0.1, x, labels) == pytest.approx(2.0, abs=0.3)


class TestSuites:
    def test_gradient_triangle_on_random_problems(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            taped, numeric = gradient_triangle(random_ffnn_problem(rng))
            assert taped < 1e-8
            assert numeric < 1e-4

    def test_deterministic_suites_pass(self):
        results = {r.name: r for r in run_verification_suites(seed=0, cases=2)}
        for name in (
            "pseudoinverse branches",
            "pseudoinverse lemma identity",
            "flop estimator pins",
            "convolution vs sliding window",
        ):
            assert results[name].passed, results[name]
        assert len(results) == 7

    def test_full_verification_passes(self):
        assert all(r.passed for r in run_verification_suites(seed=0, cases=20))
