from .gradcheck import (
    DifferentiableOp,
    block_grad_errors,
    grad_check,
    max_relative_error,
    numeric_gradient,
)
from .ops import (
    ConvGrads,
    adaptive_pool,
    adaptive_pool_backward,
    broadcast_mul,
    broadcast_mul_backward,
    channel_concat,
    channel_pool,
    channel_pool_backward,
    channel_split,
    conv2d,
    conv2d_backward,
    maxpool2d,
    maxpool2d_backward,
    relu,
    relu_backward,
    sigmoid,
    sigmoid_backward,
    silu,
    silu_backward,
)
from .tensor import (
    CHECK_DTYPE,
    PRODUCTION_DTYPE,
    ConvParams,
    ParamDict,
    Tensor,
    as_tensor,
    ensure_finite,
    init_conv,
    with_prefix,
)

__all__ = [
    "CHECK_DTYPE",
    "PRODUCTION_DTYPE",
    "ConvGrads",
    "ConvParams",
    "DifferentiableOp",
    "ParamDict",
    "Tensor",
    "adaptive_pool",
    "adaptive_pool_backward",
    "block_grad_errors",
    "as_tensor",
    "broadcast_mul",
    "broadcast_mul_backward",
    "channel_concat",
    "channel_pool",
    "channel_pool_backward",
    "channel_split",
    "conv2d",
    "conv2d_backward",
    "ensure_finite",
    "grad_check",
    "init_conv",
    "max_relative_error",
    "maxpool2d",
    "maxpool2d_backward",
    "numeric_gradient",
    "relu",
    "relu_backward",
    "sigmoid",
    "sigmoid_backward",
    "silu",
    "silu_backward",
    "with_prefix",
]
