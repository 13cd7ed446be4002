from . import composed
from .activations import ACTIVATIONS, LRELU_SLOPE, Activation, get_activation
from .primitives import register_primitive, softmax
from .tape import Tape, Var, backward, gradients, tape_apply, vjp

__all__ = [
    "ACTIVATIONS",
    "LRELU_SLOPE",
    "Activation",
    "Tape",
    "Var",
    "backward",
    "composed",
    "get_activation",
    "gradients",
    "register_primitive",
    "softmax",
    "tape_apply",
    "vjp",
]
