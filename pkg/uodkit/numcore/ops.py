"""Forward and backward functions for the NCHW ops the attention blocks need.

There is no autodiff graph: every op has an explicit ``*_backward`` that takes
the upstream gradient and the forward inputs. Convolutions use the
cross-correlation convention (no kernel flip).
"""

from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..common.exceptions import ShapeMismatchError
from .tensor import ConvParams, Tensor, require_ndim

PoolMode = Literal["avg", "max"]
ChannelMode = Literal["mean", "max"]


@dataclass
class ConvGrads:
    dx: Tensor
    dweight: Tensor
    dbias: Optional[Tensor]


def _output_size(size: int, k: int, stride: int, padding: int, axis: str, op: str) -> int:
    span = size + 2 * padding - k
    if span < 0:
        raise ShapeMismatchError(axis, f">= {k - 2 * padding}", size, op)
    # Trailing cells a strided window never reaches must all be padding.
    if span % stride > padding:
        raise ShapeMismatchError(
            axis, f"size with (size + 2*{padding} - {k}) divisible by {stride}", size, op
        )
    return span // stride + 1


def _pad(x: Tensor, padding: int, value: float) -> Tensor:
    if padding == 0:
        return x
    return np.pad(
        x,
        ((0, 0), (0, 0), (padding, padding), (padding, padding)),
        constant_values=value,
    )


def _windows(xp: Tensor, kh: int, kw: int, stride: int, oh: int, ow: int) -> Tensor:
    """(N, C, OH, OW, kh, kw) strided view of the padded input."""
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    return win[:, :, : (oh - 1) * stride + 1 : stride, : (ow - 1) * stride + 1 : stride]


def conv2d(x: Tensor, p: ConvParams) -> Tensor:
    require_ndim(x, 4, "conv2d")
    n, c, h, w = x.shape
    if c != p.in_channels:
        raise ShapeMismatchError("channel", p.in_channels, c, "conv2d")
    kh, kw = p.kernel_size
    oh = _output_size(h, kh, p.stride, p.padding, "height", "conv2d")
    ow = _output_size(w, kw, p.stride, p.padding, "width", "conv2d")
    win = _windows(_pad(x, p.padding, 0.0), kh, kw, p.stride, oh, ow)
    y = np.einsum("nchwij,ocij->nohw", win, p.weight, optimize=True)
    if p.bias is not None:
        y = y + p.bias[None, :, None, None]
    return y.astype(np.result_type(x, p.weight), copy=False)


def conv2d_backward(dy: Tensor, x: Tensor, p: ConvParams) -> ConvGrads:
    n, c, h, w = x.shape
    kh, kw = p.kernel_size
    s = p.stride
    oh, ow = dy.shape[2], dy.shape[3]
    xp = _pad(x, p.padding, 0.0)
    win = _windows(xp, kh, kw, s, oh, ow)
    dweight = np.einsum("nchwij,nohw->ocij", win, dy, optimize=True)
    dbias = dy.sum(axis=(0, 2, 3)) if p.bias is not None else None

    dxp = np.zeros(xp.shape, dtype=np.result_type(dy, p.weight))
    for i in range(kh):
        for j in range(kw):
            contrib = np.einsum("nohw,oc->nchw", dy, p.weight[:, :, i, j], optimize=True)
            dxp[:, :, i : i + (oh - 1) * s + 1 : s, j : j + (ow - 1) * s + 1 : s] += contrib
    pad = p.padding
    dx = dxp[:, :, pad : pad + h, pad : pad + w]
    return ConvGrads(
        dx=np.ascontiguousarray(dx),
        dweight=dweight.astype(p.weight.dtype, copy=False),
        dbias=None if dbias is None else dbias.astype(p.bias.dtype, copy=False),
    )


def _check_pool(k: int, stride: int, padding: Optional[int]) -> int:
    if k % 2 == 0 or k < 1:
        raise ShapeMismatchError("kernel", "odd size", k, "maxpool2d")
    if padding is None:
        padding = k // 2
    if stride == 1 and padding != k // 2:
        raise ShapeMismatchError("padding", k // 2, padding, "maxpool2d")
    return padding


def maxpool2d(x: Tensor, k: int, stride: int = 1, padding: Optional[int] = None) -> Tensor:
    """k×k max pool; padded cells hold -inf so negative activations pool correctly."""
    require_ndim(x, 4, "maxpool2d")
    padding = _check_pool(k, stride, padding)
    oh = _output_size(x.shape[2], k, stride, padding, "height", "maxpool2d")
    ow = _output_size(x.shape[3], k, stride, padding, "width", "maxpool2d")
    win = _windows(_pad(x, padding, -np.inf), k, k, stride, oh, ow)
    return win.max(axis=(-2, -1))


def maxpool2d_backward(
    dy: Tensor, x: Tensor, k: int, stride: int = 1, padding: Optional[int] = None
) -> Tensor:
    """Routes each gradient to the first maximal element (row-major) of its window."""
    padding = _check_pool(k, stride, padding)
    n, c, h, w = x.shape
    oh, ow = dy.shape[2], dy.shape[3]
    xp = _pad(x, padding, -np.inf)
    hp, wp = xp.shape[2], xp.shape[3]
    win = _windows(xp, k, k, stride, oh, ow).reshape(n, c, oh, ow, k * k)
    arg = win.argmax(axis=-1)

    rows = np.arange(oh)[None, None, :, None] * stride + arg // k
    cols = np.arange(ow)[None, None, None, :] * stride + arg % k
    plane = (np.arange(n)[:, None, None, None] * c + np.arange(c)[None, :, None, None])
    flat = (plane * hp + rows) * wp + cols
    dxp = np.bincount(flat.ravel(), weights=dy.ravel(), minlength=n * c * hp * wp)
    dxp = dxp.reshape(n, c, hp, wp)
    return np.ascontiguousarray(
        dxp[:, :, padding : padding + h, padding : padding + w], dtype=dy.dtype
    )


def adaptive_pool(x: Tensor, mode: PoolMode) -> Tensor:
    """Global per-channel mean or max; output is N×C×1×1."""
    require_ndim(x, 4, "adaptive_pool")
    if x.shape[2] == 0 or x.shape[3] == 0:
        raise ShapeMismatchError("spatial", ">= 1", x.shape[2:], "adaptive_pool")
    if mode == "avg":
        return x.mean(axis=(2, 3), keepdims=True)
    if mode == "max":
        return x.max(axis=(2, 3), keepdims=True)
    raise ValueError(f"unknown pool mode: {mode}")


def adaptive_pool_backward(dy: Tensor, x: Tensor, mode: PoolMode) -> Tensor:
    n, c, h, w = x.shape
    if mode == "avg":
        return np.broadcast_to(dy / (h * w), x.shape).astype(dy.dtype, copy=True)
    arg = x.reshape(n, c, h * w).argmax(axis=-1)
    dx = np.zeros((n, c, h * w), dtype=dy.dtype)
    np.put_along_axis(dx, arg[..., None], dy.reshape(n, c, 1), axis=-1)
    return dx.reshape(x.shape)


def channel_pool(x: Tensor, mode: ChannelMode) -> Tensor:
    """Per-pixel mean or max over channels; output is N×1×H×W."""
    require_ndim(x, 4, "channel_pool")
    if mode == "mean":
        return x.mean(axis=1, keepdims=True)
    if mode == "max":
        return x.max(axis=1, keepdims=True)
    raise ValueError(f"unknown channel mode: {mode}")


def channel_pool_backward(dy: Tensor, x: Tensor, mode: ChannelMode) -> Tensor:
    c = x.shape[1]
    if mode == "mean":
        return np.broadcast_to(dy / c, x.shape).astype(dy.dtype, copy=True)
    arg = x.argmax(axis=1)
    onehot = np.arange(c)[None, :, None, None] == arg[:, None]
    return np.where(onehot, dy, 0).astype(dy.dtype, copy=False)


def sigmoid(x: Tensor) -> Tensor:
    """Numerically stable logistic function."""
    x = np.asarray(x)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(dy: Tensor, y: Tensor) -> Tensor:
    """Gradient given the forward *output* ``y``."""
    return dy * y * (1.0 - y)


def silu(x: Tensor) -> Tensor:
    return x * sigmoid(x)


def silu_backward(dy: Tensor, x: Tensor) -> Tensor:
    s = sigmoid(x)
    return dy * (s + x * s * (1.0 - s))


def relu(x: Tensor) -> Tensor:
    return np.maximum(x, 0)


def relu_backward(dy: Tensor, x: Tensor) -> Tensor:
    return np.where(x > 0, dy, 0).astype(dy.dtype, copy=False)


def channel_concat(xs: Sequence[Tensor]) -> Tensor:
    if not xs:
        raise ValueError("channel_concat needs at least one tensor")
    ref = xs[0]
    for t in xs:
        require_ndim(t, 4, "channel_concat")
        for axis, name in ((0, "batch"), (2, "height"), (3, "width")):
            if t.shape[axis] != ref.shape[axis]:
                raise ShapeMismatchError(name, ref.shape[axis], t.shape[axis], "channel_concat")
    return np.concatenate(xs, axis=1)


def channel_split(y: Tensor, sizes: Sequence[int]) -> List[Tensor]:
    """Inverse of :func:`channel_concat`; also its backward."""
    if sum(sizes) != y.shape[1]:
        raise ShapeMismatchError("channel", sum(sizes), y.shape[1], "channel_split")
    return np.split(y, np.cumsum(sizes)[:-1], axis=1)


def _check_broadcast(x: Tensor, w: Tensor) -> None:
    require_ndim(x, 4, "broadcast_mul")
    require_ndim(w, 4, "broadcast_mul")
    n, c, h, wd = x.shape
    if w.shape not in ((n, c, 1, 1), (n, 1, h, wd)):
        raise ShapeMismatchError(
            "broadcast", f"{(n, c, 1, 1)} or {(n, 1, h, wd)}", w.shape, "broadcast_mul"
        )


def broadcast_mul(x: Tensor, w: Tensor) -> Tensor:
    _check_broadcast(x, w)
    return x * w


def broadcast_mul_backward(dy: Tensor, x: Tensor, w: Tensor) -> tuple[Tensor, Tensor]:
    _check_broadcast(x, w)
    # Channel weights (N,C,1,1) reduce over space; spatial maps (N,1,H,W) over channels.
    if w.shape[1] == x.shape[1] and w.shape[2:] == (1, 1):
        axes = (2, 3)
    else:
        axes = (1,)
    dw = (dy * x).sum(axis=axes, keepdims=True)
    return dy * w, dw.astype(w.dtype, copy=False)
