import numpy as np
import pytest

from benchmarks.batches import one_hot
from ffnn import NetworkSpec, TargetParams, targets_to_weights_scu
from rnn import (
    RnnSpec,
    RnnTargetParams,
    rnn_forward,
    rnn_init_targets,
    rnn_loss_and_accuracy,
    rnn_loss_and_target_gradient,
    rnn_loss_and_weight_gradient,
    rnn_project_targets,
    rnn_targets_to_weights_ocu,
    rnn_targets_to_weights_scu,
)
from tensor import ShapeError
from verification import finite_diff_gradient, max_abs, relative_error


@pytest.fixture
def spec():
    # context layer 4 feeds back; layer 5 is the only exit layer
    return RnnSpec(1, (3, 3), 2)


def _sequence(rng, steps, n):
    return [rng.standard_normal((1, n)) for _ in range(steps)]


def _labels(rng, steps, n):
    return [one_hot(rng.integers(0, 2, size=n), 2) for _ in range(steps)]


def _random_weights(spec, rng, scale=0.6):
    return [scale * rng.standard_normal(s) for s in spec.weight_shapes()]


class TestRnnSpec:
    def test_default_context_layer(self):
        assert RnnSpec(1, (4,), 2).c_l == 3
        assert RnnSpec(1, (4, 5), 2).c_l == 4

    def test_feedback_width_follows_context_layer(self):
        spec = RnnSpec(1, (4, 5), 2, context_layer=3)
        assert spec.width(2) == 4
        assert spec.weight_shapes() == [(4, 6), (5, 5), (2, 6)]

    def test_rejects_context_outside_compute_layers(self):
        with pytest.raises(ValueError):
            RnnSpec(1, (4,), 2, context_layer=2)


class TestRnnForward:
    def test_zero_weights_give_zero_outputs(self, spec, rng):
        weights = [np.zeros(s) for s in spec.weight_shapes()]
        _, outputs = rnn_forward(spec, weights, _sequence(rng, 4, 3))
        assert max_abs(outputs) == 0.0

    def test_matches_scalar_recurrence(self, rng):
        spec = RnnSpec(1, (4,), 2)
        w3, w4 = _random_weights(spec, rng)
        xs = _sequence(rng, 5, 1)
        _, outputs = rnn_forward(spec, [w3, w4], xs)
        h = [0.0] * 4
        for t, x in enumerate(xs):
            stacked = [1.0, float(x[0, 0]), *h]
            h = [np.tanh(sum(w3[r, i] * stacked[i] for i in range(6))) for r in range(4)]
            for r in range(2):
                expected = w4[r, 0] + sum(w4[r, 1 + i] * h[i] for i in range(4))
                assert outputs[t][r, 0] == pytest.approx(expected, abs=1e-12)

    def test_rejects_ragged_sequence(self, spec, rng):
        weights = _random_weights(spec, rng)
        with pytest.raises(ShapeError):
            rnn_forward(spec, weights, [np.zeros((1, 3)), np.zeros((1, 4))])


class TestRnnMapping:
    def test_round_trip_on_reachable_targets(self, spec, rng):
        w0 = _random_weights(spec, rng)
        xbar = _sequence(rng, 5, 4)
        trace, _ = rnn_forward(spec, w0, xbar)
        t = RnnTargetParams(tuple(trace.rolled_sums(j) for j in spec.layers()), tuple(xbar))
        weights = rnn_targets_to_weights_scu(spec, t, 1e-10)
        assert max_abs([a - b for a, b in zip(weights, w0)]) < 1e-6

    def test_zero_targets_give_zero_weights(self, spec, rng):
        xbar = tuple(_sequence(rng, 3, 4))
        t = RnnTargetParams(tuple(np.zeros((spec.width(j), 12)) for j in spec.layers()), xbar)
        weights = rnn_targets_to_weights_scu(spec, t, 0.1)
        assert max_abs(weights) == 0.0

    def test_single_step_reduces_to_feed_forward(self, rng):
        spec = RnnSpec(1, (4,), 2)
        xbar = _sequence(rng, 1, 6)
        t = rnn_init_targets(spec, xbar, 1.0, rng)
        w3, w4 = rnn_targets_to_weights_scu(spec, t, 0.1)
        ffnn_spec = NetworkSpec((1, 4, 2))
        ffnn_w, _ = targets_to_weights_scu(ffnn_spec, TargetParams(t.targets, xbar[0]), 0.1)
        np.testing.assert_allclose(w3[:, :2], ffnn_w.weights[0], atol=1e-12)
        np.testing.assert_allclose(w3[:, 2:], 0.0, atol=1e-12)
        np.testing.assert_allclose(w4, ffnn_w.weights[1], atol=1e-12)

    def test_ocu_and_scu_differ_on_random_targets(self, spec, rng):
        t = rnn_init_targets(spec, _sequence(rng, 4, 3), 1.0, rng)
        scu = rnn_targets_to_weights_scu(spec, t, 0.1)
        ocu = rnn_targets_to_weights_ocu(spec, t, 0.1)
        assert max_abs([scu[-1] - ocu[-1]]) > 1e-3

    def test_projected_targets_are_reached(self, spec, rng):
        t = rnn_init_targets(spec, _sequence(rng, 4, 5), 1.0, rng)
        projected = rnn_project_targets(spec, t, 0.01)
        weights = rnn_targets_to_weights_scu(spec, projected, 0.01)
        trace, _ = rnn_forward(spec, weights, projected.xbar)
        assert all(m.shape == (spec.width(j), 20) for j, m in zip(spec.layers(), projected.targets))
        assert np.all(np.isfinite(trace.rolled_sums(spec.n_layers)))

    def test_init_rejects_nonpositive_sigma(self, spec, rng):
        with pytest.raises(ValueError):
            rnn_init_targets(spec, _sequence(rng, 2, 3), 0.0, rng)


class TestRnnGradients:
    def test_weight_gradient_matches_finite_differences(self, spec, rng):
        weights = _random_weights(spec, rng)
        xs, labels = _sequence(rng, 4, 3), _labels(rng, 4, 3)
        _, grads = rnn_loss_and_weight_gradient(spec, weights, xs, labels)
        numeric = finite_diff_gradient(
            lambda ws: rnn_loss_and_accuracy(spec, ws, xs, labels)[0], weights, 1e-6
        )
        assert relative_error(grads, numeric) < 1e-6

    @pytest.mark.parametrize("untangling", ["scu", "ocu"])
    def test_target_gradient_matches_finite_differences(self, spec, rng, untangling):
        t = rnn_init_targets(spec, _sequence(rng, 3, 4), 1.0, rng)
        xs, labels = _sequence(rng, 4, 3), _labels(rng, 4, 3)
        mask = [False, True, True, True]

        def loss(targets):
            convert = (
                rnn_targets_to_weights_scu if untangling == "scu" else rnn_targets_to_weights_ocu
            )
            weights = convert(spec, t.with_targets(targets), 0.1)
            return rnn_loss_and_accuracy(spec, weights, xs, labels, mask)[0]

        _, grads = rnn_loss_and_target_gradient(spec, t, 0.1, xs, labels, mask, untangling)
        numeric = finite_diff_gradient(loss, t.as_list())
        assert relative_error(grads, numeric) < 1e-6

    def test_masked_steps_do_not_contribute(self, spec, rng):
        weights = _random_weights(spec, rng)
        xs, labels = _sequence(rng, 4, 3), _labels(rng, 4, 3)
        mask = [False, False, True, True]
        loss, grads = rnn_loss_and_weight_gradient(spec, weights, xs, labels, mask)
        flipped = [1.0 - labels[0], 1.0 - labels[1], labels[2], labels[3]]
        loss_f, grads_f = rnn_loss_and_weight_gradient(spec, weights, xs, flipped, mask)
        assert loss == loss_f
        for a, b in zip(grads, grads_f):
            np.testing.assert_array_equal(a, b)

    def test_mask_must_keep_a_step(self, spec, rng):
        weights = _random_weights(spec, rng)
        xs, labels = _sequence(rng, 2, 3), _labels(rng, 2, 3)
        with pytest.raises(ValueError):
            rnn_loss_and_weight_gradient(spec, weights, xs, labels, [False, False])
