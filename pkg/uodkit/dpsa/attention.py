"""Channel attention, spatial attention and their sequential composition.

Each block has a ``*_with_cache`` forward that keeps what the backward pass
needs, and a ``*_backward`` returning ``(dx, grads)`` where ``grads`` is keyed
like the params' ``named_parameters(prefix)``.
"""

from dataclasses import dataclass
from typing import Tuple

from ..common.exceptions import ShapeMismatchError
from ..numcore import (
    ParamDict,
    Tensor,
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
    relu,
    relu_backward,
    sigmoid,
    sigmoid_backward,
)
from ..numcore.tensor import require_ndim
from .params import ChannelAttentionParams, DPSAParams, SpatialAttentionParams


@dataclass
class _MLPBranch:
    pooled: Tensor
    hidden: Tensor
    activated: Tensor


@dataclass
class ChannelAttentionCache:
    x: Tensor
    avg: _MLPBranch
    max: _MLPBranch
    weights: Tensor
    y: Tensor


@dataclass
class SpatialAttentionCache:
    x: Tensor
    stats: Tensor
    map: Tensor
    y: Tensor


@dataclass
class DPSACache:
    channel: ChannelAttentionCache
    spatial: SpatialAttentionCache

    @property
    def y(self) -> Tensor:
        return self.spatial.y


def _mlp(pooled: Tensor, p: ChannelAttentionParams) -> Tuple[_MLPBranch, Tensor]:
    hidden = conv2d(pooled, p.reduce)
    activated = relu(hidden)
    return _MLPBranch(pooled, hidden, activated), conv2d(activated, p.expand)


def channel_attention_with_cache(x: Tensor, p: ChannelAttentionParams) -> ChannelAttentionCache:
    require_ndim(x, 4, "channel_attention")
    if x.shape[1] != p.channels:
        raise ShapeMismatchError("channel", p.channels, x.shape[1], "channel_attention")
    avg_branch, avg_out = _mlp(adaptive_pool(x, "avg"), p)
    max_branch, max_out = _mlp(adaptive_pool(x, "max"), p)
    weights = sigmoid(avg_out + max_out)
    return ChannelAttentionCache(x, avg_branch, max_branch, weights, broadcast_mul(x, weights))


def channel_attention(x: Tensor, p: ChannelAttentionParams) -> Tuple[Tensor, Tensor]:
    """Return ``(weights N×C×1×1, x re-weighted per channel)``."""
    cache = channel_attention_with_cache(x, p)
    return cache.weights, cache.y


def channel_attention_backward(
    dy: Tensor, cache: ChannelAttentionCache, p: ChannelAttentionParams, prefix: str = ""
) -> Tuple[Tensor, ParamDict]:
    dx, dweights = broadcast_mul_backward(dy, cache.x, cache.weights)
    dlogits = sigmoid_backward(dweights, cache.weights)

    grads: ParamDict = {}
    for branch, mode in ((cache.avg, "avg"), (cache.max, "max")):
        expand = conv2d_backward(dlogits, branch.activated, p.expand)
        dhidden = relu_backward(expand.dx, branch.hidden)
        reduce = conv2d_backward(dhidden, branch.pooled, p.reduce)
        dx = dx + adaptive_pool_backward(reduce.dx, cache.x, mode)
        # Both branches feed the same parameters, so their gradients add.
        for name, g in (
            ("reduce.weight", reduce.dweight),
            ("reduce.bias", reduce.dbias),
            ("expand.weight", expand.dweight),
            ("expand.bias", expand.dbias),
        ):
            if g is not None:
                key = f"{prefix}{name}"
                grads[key] = grads[key] + g if key in grads else g
    return dx, grads


def spatial_attention_with_cache(x: Tensor, p: SpatialAttentionParams) -> SpatialAttentionCache:
    stats = channel_concat([channel_pool(x, "mean"), channel_pool(x, "max")])
    attn = sigmoid(conv2d(stats, p.conv))
    return SpatialAttentionCache(x, stats, attn, broadcast_mul(x, attn))


def spatial_attention(x: Tensor, p: SpatialAttentionParams) -> Tuple[Tensor, Tensor]:
    """Return ``(map N×1×H×W, x re-weighted per pixel)``."""
    cache = spatial_attention_with_cache(x, p)
    return cache.map, cache.y


def spatial_attention_backward(
    dy: Tensor, cache: SpatialAttentionCache, p: SpatialAttentionParams, prefix: str = ""
) -> Tuple[Tensor, ParamDict]:
    dx, dmap = broadcast_mul_backward(dy, cache.x, cache.map)
    conv = conv2d_backward(sigmoid_backward(dmap, cache.map), cache.stats, p.conv)
    dmean, dmax = channel_split(conv.dx, [1, 1])
    dx = dx + channel_pool_backward(dmean, cache.x, "mean")
    dx = dx + channel_pool_backward(dmax, cache.x, "max")
    grads = {f"{prefix}conv.weight": conv.dweight}
    if conv.dbias is not None:
        grads[f"{prefix}conv.bias"] = conv.dbias
    return dx, grads


def dpsa_with_cache(x: Tensor, p: DPSAParams) -> DPSACache:
    channel = channel_attention_with_cache(x, p.channel)
    return DPSACache(channel, spatial_attention_with_cache(channel.y, p.spatial))


def dpsa_forward(x: Tensor, p: DPSAParams) -> Tensor:
    """Channel attention followed by spatial attention; shape preserved."""
    return dpsa_with_cache(x, p).y


def dpsa_backward(
    dy: Tensor, cache: DPSACache, p: DPSAParams, prefix: str = ""
) -> Tuple[Tensor, ParamDict]:
    dmid, spatial_grads = spatial_attention_backward(
        dy, cache.spatial, p.spatial, f"{prefix}spatial."
    )
    dx, channel_grads = channel_attention_backward(
        dmid, cache.channel, p.channel, f"{prefix}channel."
    )
    return dx, {**channel_grads, **spatial_grads}
