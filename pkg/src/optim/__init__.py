from .steps import (
    Adam,
    OptimizerKind,
    OptimizerState,
    Sgd,
    adam_step,
    halving_step_size,
    make_optimizer,
    sgd_step,
)

__all__ = [
    "Adam",
    "OptimizerKind",
    "OptimizerState",
    "Sgd",
    "adam_step",
    "halving_step_size",
    "make_optimizer",
    "sgd_step",
]
