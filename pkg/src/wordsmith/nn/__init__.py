from .tensor import (
    GradientError,
    Tensor,
    concat,
    gather_rows,
    grad,
    l2_norm,
    smooth_l1,
    stop_gradient,
)
from .mlp import DimensionError, Mlp, input_gradient, WEIGHT_MAGIC
from .adam import AdamState, NonFiniteGradError, adam_step, clip_global_norm

__all__ = [
    "AdamState",
    "DimensionError",
    "GradientError",
    "Mlp",
    "NonFiniteGradError",
    "Tensor",
    "WEIGHT_MAGIC",
    "adam_step",
    "clip_global_norm",
    "concat",
    "gather_rows",
    "grad",
    "input_gradient",
    "l2_norm",
    "smooth_l1",
    "stop_gradient",
]
