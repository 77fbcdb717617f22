from .adam import AdamState, adam_step
from .complex import ComplexTensor
from .gradcheck import GradCheckReport, grad_check
from .tensor import (
    ShapeError, Tape, Tensor, add, as_tensor, backward, broadcast_to, concat, detach, div, getitem,
    grad, l2_normalize, log2_1p, matmul, max_pool, mean, mean_pool, mul, neg, positive_part, relu,
    reshape, softmax, sqrt, square, sub, swapaxes, take_along_axis, tsum,
)

__all__ = [
    "AdamState", "ComplexTensor", "GradCheckReport", "ShapeError", "Tape", "Tensor", "adam_step", "add",
    "as_tensor", "backward", "broadcast_to", "concat", "detach", "div", "getitem", "grad", "grad_check",
    "l2_normalize", "log2_1p", "matmul", "max_pool", "mean", "mean_pool", "mul", "neg", "positive_part",
    "relu", "reshape", "softmax", "sqrt", "square", "sub", "swapaxes", "take_along_axis", "tsum",
]
