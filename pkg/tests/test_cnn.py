import numpy as np
import pytest

from benchmarks.batches import one_hot
from cnn import (
    CnnSpec,
    ConvLayerSpec,
    FeatureMap,
    cnn_dropout_masks,
    cnn_loss_and_accuracy,
    cnn_loss_and_target_gradient,
    cnn_loss_and_weight_gradient,
    cnn_targets_to_weights,
    conv_forward,
    conv_targets_to_weights,
    extract_patches,
    flatten_map,
    init_cnn_targets,
    init_cnn_weights,
    maxpool,
    project_cnn_targets,
)
from tensor import ShapeError
from verification import finite_diff_gradient, max_abs, naive_convolution, relative_error


def _images(rng, n, c, side):
    return FeatureMap.from_tensor(rng.standard_normal((n, c, side, side)))


class TestPatches:
    def test_one_by_one_kernel_is_bias_plus_data(self, rng):
        fmap = _images(rng, 2, 3, 4)
        patches = extract_patches(fmap, ConvLayerSpec(1, 1, 3, 5))
        np.testing.assert_array_equal(patches.data[0], np.ones(32))
        np.testing.assert_array_equal(patches.data[1:], fmap.data)

    def test_borders_are_zero_padded(self):
        fmap = FeatureMap(np.ones((1, 4)), 1, 2, 2)
        patches = extract_patches(fmap, ConvLayerSpec(3, 3, 1, 1))
        assert patches.data.shape == (10, 4)
        # column 0 is the top-left pixel; tap (0, 0) falls outside, the centre tap inside
        assert patches.data[1, 0] == 0.0
        assert patches.data[1 + 4, 0] == 1.0
        assert patches.data[1 + 8, 0] == 1.0
        assert patches.data[1 + 8, 3] == 0.0

    def test_channel_mismatch(self, rng):
        with pytest.raises(ShapeError):
            extract_patches(_images(rng, 1, 2, 3), ConvLayerSpec(3, 3, 1, 1))


class TestConvolution:
    @pytest.mark.parametrize("kernel", [1, 2, 3])
    def test_matches_sliding_window(self, rng, kernel):
        spec = ConvLayerSpec(kernel, kernel, 2, 3)
        fmap = _images(rng, 2, 2, 5)
        w = rng.standard_normal(spec.kernel_shape)
        out = conv_forward(spec, w, extract_patches(fmap, spec), "identity")
        expected = naive_convolution(fmap.to_tensor(), w, spec)
        np.testing.assert_allclose(out.to_tensor(), expected, atol=1e-12)

    def test_matches_sliding_window_on_random_shapes(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            kernel_h, kernel_w = (int(k) for k in rng.choice([1, 2, 3, 5], size=2))
            channels, out_channels = (int(c) for c in rng.integers(1, 5, size=2))
            spec = ConvLayerSpec(kernel_h, kernel_w, channels, out_channels)
            images = rng.standard_normal(
                (int(rng.integers(1, 4)), spec.in_channels, *rng.integers(1, 8, size=2))
            )
            w = rng.standard_normal(spec.kernel_shape)
            fmap = FeatureMap.from_tensor(images)
            out = conv_forward(spec, w, extract_patches(fmap, spec), "identity")
            np.testing.assert_allclose(
                out.to_tensor(), naive_convolution(images, w, spec), rtol=0, atol=1e-10
            )

    def test_delta_kernel_copies_the_input(self, rng):
        spec = ConvLayerSpec(3, 3, 1, 1)
        fmap = _images(rng, 2, 1, 4)
        w = np.zeros(spec.kernel_shape)
        w[0, 1 + 4] = 1.0
        out = conv_forward(spec, w, extract_patches(fmap, spec), "identity")
        np.testing.assert_array_equal(out.data, fmap.data)

    def test_bias_only_kernel(self, rng):
        spec = ConvLayerSpec(3, 3, 2, 2)
        w = np.zeros(spec.kernel_shape)
        w[:, 0] = [0.5, -1.0]
        out = conv_forward(spec, w, extract_patches(_images(rng, 1, 2, 3), spec), "identity")
        np.testing.assert_array_equal(out.data[0], np.full(9, 0.5))
        np.testing.assert_array_equal(out.data[1], np.full(9, -1.0))

    def test_targets_to_kernel_round_trip(self, rng):
        spec = ConvLayerSpec(3, 3, 1, 4)
        patches = extract_patches(_images(rng, 2, 1, 5), spec)
        w0 = rng.standard_normal(spec.kernel_shape)
        w = conv_targets_to_weights(w0 @ patches.data, patches, 1e-10)
        np.testing.assert_allclose(w, w0, atol=1e-6)

    def test_torch_conv2d_agrees(self, rng):
        torch = pytest.importorskip("torch")
        spec = ConvLayerSpec(3, 3, 2, 4)
        fmap = _images(rng, 3, 2, 6)
        w = rng.standard_normal(spec.kernel_shape)
        out = conv_forward(spec, w, extract_patches(fmap, spec), "identity")
        kernel = w[:, 1:].reshape(4, 3, 3, 2).transpose(0, 3, 1, 2)
        expected = torch.nn.functional.conv2d(
            torch.from_numpy(fmap.to_tensor().copy()),
            torch.from_numpy(np.ascontiguousarray(kernel)),
            torch.from_numpy(w[:, 0].copy()),
            padding=1,
        )
        np.testing.assert_allclose(out.to_tensor(), expected.numpy(), atol=1e-10)


class TestPoolingAndFlattening:
    def test_maxpool_known_values(self):
        fmap = FeatureMap(np.arange(16.0).reshape(1, 16), 1, 4, 4)
        pooled = maxpool(fmap, 2)
        assert (pooled.height, pooled.width) == (2, 2)
        np.testing.assert_array_equal(pooled.data, [[5.0, 7.0, 13.0, 15.0]])

    def test_maxpool_keeps_channels_and_batch_apart(self, rng):
        fmap = _images(rng, 3, 2, 4)
        pooled = maxpool(fmap, 2).to_tensor()
        expected = fmap.to_tensor().reshape(3, 2, 2, 2, 2, 2).max(axis=(3, 5))
        np.testing.assert_array_equal(pooled, expected)

    def test_maxpool_one_is_identity(self, rng):
        fmap = _images(rng, 1, 1, 3)
        assert maxpool(fmap, 1) is fmap

    def test_indivisible_side(self, rng):
        with pytest.raises(ShapeError):
            maxpool(_images(rng, 1, 1, 3), 2)
        with pytest.raises(ShapeError):
            CnnSpec.from_triples(1, 5, [(3, 2, 2)], [2])

    def test_flatten_inverts_from_columns(self, rng):
        x = rng.standard_normal((2 * 3 * 3, 4))
        np.testing.assert_array_equal(flatten_map(FeatureMap.from_columns(x, 2, 3, 3)), x)


@pytest.fixture
def small_cnn():
    return CnnSpec.from_triples(1, 4, [(3, 2, 2)], [3, 2], activation="tanh")


class TestCnnNetwork:
    def test_shapes(self, small_cnn):
        assert small_cnn.weight_shapes() == [(2, 10), (3, 9), (2, 4)]
        assert small_cnn.target_shapes(5) == [(2, 80), (3, 5), (2, 5)]

    def test_dropout_layout(self):
        spec = CnnSpec.from_triples(1, 8, [(3, 2, 2), (3, 2, 2)], [4, 2])
        masks = cnn_dropout_masks(spec, 3, 0.5, 0)
        assert [m is not None for m in masks] == [False, True, True, False]
        assert masks[1].shape == (2, 3 * 16)
        assert cnn_dropout_masks(spec, 3, 0.0, 0) == [None] * 4

    def test_projected_targets_reproduce_themselves(self, small_cnn, rng):
        xbar = _images(rng, 6, 1, 4)
        t = project_cnn_targets(small_cnn, init_cnn_targets(small_cnn, xbar, 1.0, rng), 1e-8)
        again = project_cnn_targets(small_cnn, t, 1e-8)
        assert relative_error(again.targets, t.targets) < 1e-5

    def test_chunked_evaluation_matches_one_pass(self, small_cnn, rng):
        weights = init_cnn_weights(small_cnn, 0)
        x = _images(rng, 7, 1, 4)
        labels = one_hot(rng.integers(0, 2, size=7), 2)
        whole = cnn_loss_and_accuracy(small_cnn, weights, x, labels)
        chunked = cnn_loss_and_accuracy(small_cnn, weights, x, labels, chunk=3)
        assert chunked == pytest.approx(whole, rel=1e-12)

    def test_weight_gradient_matches_finite_differences(self, small_cnn, rng):
        weights = [0.5 * rng.standard_normal(s) for s in small_cnn.weight_shapes()]
        x = _images(rng, 4, 1, 4)
        labels = one_hot(rng.integers(0, 2, size=4), 2)
        _, grads = cnn_loss_and_weight_gradient(small_cnn, weights, x, labels)
        numeric = finite_diff_gradient(
            lambda ws: cnn_loss_and_accuracy(small_cnn, ws, x, labels)[0], weights
        )
        assert relative_error(grads, numeric) < 1e-5

    @pytest.mark.parametrize("untangling", ["scu", "ocu"])
    def test_target_gradient_matches_finite_differences(self, small_cnn, rng, untangling):
        xbar = _images(rng, 3, 1, 4)
        t = init_cnn_targets(small_cnn, xbar, 1.0, rng)
        x = _images(rng, 5, 1, 4)
        labels = one_hot(rng.integers(0, 2, size=5), 2)

        def loss(targets):
            weights = cnn_targets_to_weights(small_cnn, t.with_targets(targets), 0.1, untangling)
            return cnn_loss_and_accuracy(small_cnn, weights, x, labels)[0]

        _, grads = cnn_loss_and_target_gradient(small_cnn, t, 0.1, x, labels, untangling)
        numeric = finite_diff_gradient(loss, t.as_list())
        assert relative_error(grads, numeric) < 1e-3
        assert max_abs(grads) > 0.0

    def test_targets_must_match_shapes(self, small_cnn, rng):
        t = init_cnn_targets(small_cnn, _images(rng, 3, 1, 4), 1.0, rng)
        bad = t.with_targets([t.targets[0][:, :-1], *t.targets[1:]])
        with pytest.raises(ShapeError):
            cnn_targets_to_weights(small_cnn, bad, 0.1)
