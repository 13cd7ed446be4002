from . import primitives  # noqa: F401  registers im2col, maxpool and flatten_map
from .geometry import ConvLayerSpec, FeatureMap, PatchMatrix
from .layers import conv_forward, conv_targets_to_weights, extract_patches, flatten_map, maxpool
from .network import (
    CnnSpec,
    CnnTargetParams,
    cnn_dropout_masks,
    cnn_forward,
    cnn_loss_and_accuracy,
    cnn_loss_and_target_gradient,
    cnn_loss_and_weight_gradient,
    cnn_targets_to_weights,
    init_cnn_targets,
    init_cnn_weights,
    project_cnn_targets,
    taped_cnn_forward,
    taped_cnn_weights,
)

__all__ = [
    "CnnSpec",
    "CnnTargetParams",
    "ConvLayerSpec",
    "FeatureMap",
    "PatchMatrix",
    "cnn_dropout_masks",
    "cnn_forward",
    "cnn_loss_and_accuracy",
    "cnn_loss_and_target_gradient",
    "cnn_loss_and_weight_gradient",
    "cnn_targets_to_weights",
    "conv_forward",
    "conv_targets_to_weights",
    "extract_patches",
    "flatten_map",
    "init_cnn_targets",
    "init_cnn_weights",
    "maxpool",
    "project_cnn_targets",
    "taped_cnn_forward",
    "taped_cnn_weights",
]
