"""Dense tensor carrier and convolution parameters.

Tensors are plain ``numpy`` arrays in NCHW layout. Production paths run in
float32; the float64 check mode exists only for finite-difference gradient
checks.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import numpy.typing as npt

from ..common.exceptions import NonFiniteError, ShapeMismatchError

Tensor = npt.NDArray[np.floating]
ParamDict = Dict[str, Tensor]

PRODUCTION_DTYPE = np.float32
CHECK_DTYPE = np.float64


def as_tensor(data, dtype=PRODUCTION_DTYPE) -> Tensor:
    """Return ``data`` as a C-contiguous array of ``dtype``."""
    return np.ascontiguousarray(data, dtype=dtype)


def ensure_finite(x: Tensor, what: str = "value") -> Tensor:
    if not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        raise NonFiniteError(tuple(int(i) for i in bad), what)
    return x


def require_ndim(x: Tensor, ndim: int, op: str) -> None:
    if x.ndim != ndim:
        raise ShapeMismatchError("ndim", ndim, x.ndim, op)


def with_prefix(prefix: str, params: ParamDict) -> ParamDict:
    return {f"{prefix}{name}": value for name, value in params.items()}


@dataclass
class ConvParams:
    """Weights of one 2D convolution.

    ``weight`` has shape (out_ch, in_ch, kh, kw); ``bias`` has shape (out_ch,)
    or is absent.
    """

    weight: Tensor
    bias: Optional[Tensor] = None
    stride: int = 1
    padding: int = 0

    def __post_init__(self):
        require_ndim(self.weight, 4, "ConvParams")
        out_ch, _, kh, kw = self.weight.shape
        if kh % 2 == 0 or kw % 2 == 0:
            raise ShapeMismatchError("kernel", "odd size", (kh, kw), "ConvParams")
        if self.bias is not None and self.bias.shape != (out_ch,):
            raise ShapeMismatchError("bias", (out_ch,), self.bias.shape, "ConvParams")
        if self.stride < 1:
            raise ShapeMismatchError("stride", ">= 1", self.stride, "ConvParams")
        if self.padding < 0:
            raise ShapeMismatchError("padding", ">= 0", self.padding, "ConvParams")

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def kernel_size(self) -> tuple[int, int]:
        return self.weight.shape[2], self.weight.shape[3]

    def named_parameters(self, prefix: str = "") -> ParamDict:
        params = {f"{prefix}weight": self.weight}
        if self.bias is not None:
            params[f"{prefix}bias"] = self.bias
        return params

    def astype(self, dtype) -> "ConvParams":
        return ConvParams(
            weight=self.weight.astype(dtype),
            bias=None if self.bias is None else self.bias.astype(dtype),
            stride=self.stride,
            padding=self.padding,
        )


def init_conv(
    rng: np.random.Generator,
    in_ch: int,
    out_ch: int,
    kernel: int = 1,
    stride: int = 1,
    padding: Optional[int] = None,
    bias: bool = True,
    dtype=PRODUCTION_DTYPE,
    gain: float = 1.0,
) -> ConvParams:
    """Uniform(±gain/sqrt(fan_in)) weights, zero bias; padding defaults to kernel//2."""
    fan_in = in_ch * kernel * kernel
    bound = gain / np.sqrt(fan_in)
    weight = rng.uniform(-bound, bound, size=(out_ch, in_ch, kernel, kernel))
    return ConvParams(
        weight=weight.astype(dtype),
        bias=np.zeros(out_ch, dtype=dtype) if bias else None,
        stride=stride,
        padding=kernel // 2 if padding is None else padding,
    )
