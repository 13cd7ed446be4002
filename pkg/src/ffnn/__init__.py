from .dropout import dropout_masks, layer_masks, paired_layer_masks
from .dynamics import (
    accuracy,
    backprop,
    forward,
    head_loss,
    init_weight_matrices,
    init_weights,
    loss_and_accuracy,
    loss_and_weight_gradient,
    output_probabilities,
    weight_gradient,
)
from .mapping import (
    init_targets,
    project_targets,
    targets_to_weights,
    targets_to_weights_ocu,
    targets_to_weights_scu,
    truncated_normal,
)
from .network import ForwardTrace, NetworkSpec, TargetParams, WeightParams
from .taped import (
    target_loss,
    target_loss_and_gradient_autograd,
    taped_forward,
    taped_loss,
    taped_weights,
)
from .target_gradient import loss_and_target_gradient, target_gradient_manual

__all__ = [
    "ForwardTrace",
    "NetworkSpec",
    "TargetParams",
    "WeightParams",
    "accuracy",
    "backprop",
    "dropout_masks",
    "forward",
    "head_loss",
    "init_targets",
    "init_weight_matrices",
    "init_weights",
    "layer_masks",
    "loss_and_accuracy",
    "loss_and_target_gradient",
    "loss_and_weight_gradient",
    "output_probabilities",
    "paired_layer_masks",
    "project_targets",
    "target_gradient_manual",
    "target_loss",
    "target_loss_and_gradient_autograd",
    "taped_forward",
    "taped_loss",
    "taped_weights",
    "targets_to_weights",
    "targets_to_weights_ocu",
    "targets_to_weights_scu",
    "truncated_normal",
]
