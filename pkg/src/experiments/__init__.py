from .models import CnnModel, FfnnModel, Model, RnnModel
from .runners import run_bitstream, run_experiment, run_mnist_small, run_two_spirals
from .sweep import SWEEP_AXES, SWEEP_HEADER, SweepRow, aggregate, run_sweep, sweep_config
from .training import RunResult, StopRule, eval_interval, train

__all__ = [
    "SWEEP_AXES",
    "SWEEP_HEADER",
    "CnnModel",
    "FfnnModel",
    "Model",
    "RnnModel",
    "RunResult",
    "StopRule",
    "SweepRow",
    "aggregate",
    "eval_interval",
    "run_bitstream",
    "run_experiment",
    "run_mnist_small",
    "run_sweep",
    "run_two_spirals",
    "sweep_config",
    "train",
]
