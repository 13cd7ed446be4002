"""Convolution as patch extraction plus one matrix product, and its least-squares inverse."""

from autodiff import get_activation
from tensor import Matrix, ShapeError, regularized_lstsq

from . import primitives
from .geometry import ConvLayerSpec, FeatureMap, PatchMatrix


def extract_patches(fmap: FeatureMap, spec: ConvLayerSpec) -> PatchMatrix:
    """Patch matrix of a "same"-padded stride-1 convolution over ``fmap``."""
    if fmap.channels != spec.in_channels:
        raise ShapeError("extract_patches channels", fmap.data.shape, spec.kernel_shape)
    data = primitives.im2col_forward(
        fmap.data,
        batch=fmap.batch,
        height=fmap.height,
        width=fmap.width,
        kernel_h=spec.kernel_h,
        kernel_w=spec.kernel_w,
    )
    return PatchMatrix(data, fmap.batch, fmap.height, fmap.width)


def conv_forward(
    spec: ConvLayerSpec, w: Matrix, patches: PatchMatrix, activation: str = "lrelu"
) -> FeatureMap:
    """S = W·A reshaped to a feature map, then the activation."""
    if w.shape != spec.kernel_shape or patches.data.shape[0] != spec.patch_rows:
        raise ShapeError("conv_forward", w.shape, patches.data.shape)
    s = w @ patches.data
    return FeatureMap(
        get_activation(activation).fn(s), patches.batch, patches.height, patches.width
    )


def conv_targets_to_weights(t: Matrix, patches: PatchMatrix, lam: float) -> Matrix:
    """Kernel-plus-bias matrix W = T·A† over the patch matrix."""
    if t.shape[1] != patches.data.shape[1]:
        raise ShapeError("conv_targets_to_weights", t.shape, patches.data.shape)
    return regularized_lstsq(t, patches.data, lam)


def maxpool(fmap: FeatureMap, k: int) -> FeatureMap:
    """Max over k x k windows with stride k.

    Raises:
        ShapeError: if ``k`` does not divide both spatial sides
    """
    if k == 1:
        return fmap
    data = primitives.maxpool_forward(
        fmap.data, batch=fmap.batch, height=fmap.height, width=fmap.width, k=k
    )
    return FeatureMap(data, fmap.batch, fmap.height // k, fmap.width // k)


def flatten_map(fmap: FeatureMap) -> Matrix:
    """Features x batch matrix, channel-major then row-major over the grid."""
    area = fmap.height * fmap.width
    return primitives.flatten_map_forward(fmap.data, batch=fmap.batch, area=area)
