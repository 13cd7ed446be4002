from .dynamics import (
    init_rnn_weights,
    rnn_forward,
    rnn_loss_and_accuracy,
    rnn_loss_and_weight_gradient,
    sequence_loss,
    unroll,
)
from .mapping import (
    rnn_init_targets,
    rnn_loss_and_target_gradient,
    rnn_project_targets,
    rnn_targets_to_weights_ocu,
    rnn_targets_to_weights_scu,
    taped_rnn_weights,
)
from .network import RnnSpec, RnnTargetParams, RnnTrace

__all__ = [
    "RnnSpec",
    "RnnTargetParams",
    "RnnTrace",
    "init_rnn_weights",
    "rnn_forward",
    "rnn_init_targets",
    "rnn_loss_and_accuracy",
    "rnn_loss_and_target_gradient",
    "rnn_loss_and_weight_gradient",
    "rnn_project_targets",
    "rnn_targets_to_weights_ocu",
    "rnn_targets_to_weights_scu",
    "sequence_loss",
    "taped_rnn_weights",
    "unroll",
]
