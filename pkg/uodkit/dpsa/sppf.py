"""SPPF pyramid pooling, with or without DPSA on the concatenated pools.

The three pools run in parallel from the cv1 output (not chained), so each
branch sees exactly a k×k window of y0.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from ..numcore import (
    ParamDict,
    Tensor,
    channel_concat,
    channel_split,
    conv2d,
    conv2d_backward,
    maxpool2d,
    maxpool2d_backward,
    silu,
    silu_backward,
)
from .attention import DPSACache, dpsa_backward, dpsa_with_cache
from .params import POOL_KERNELS, SPPFParams


@dataclass
class SPPFCache:
    x: Tensor
    h: Tensor
    y0: Tensor
    pooled: Dict[int, Tensor]
    concat: Tensor
    z: Tensor
    g: Tensor
    out: Tensor
    dpsa: Optional[DPSACache] = field(default=None)


def sppf_with_cache(x: Tensor, p: SPPFParams) -> SPPFCache:
    h = conv2d(x, p.cv1)
    y0 = silu(h)
    pooled = {k: maxpool2d(y0, k, 1, k // 2) for k in POOL_KERNELS}
    concat = channel_concat([y0, *(pooled[k] for k in POOL_KERNELS)])
    dpsa_cache = dpsa_with_cache(concat, p.dpsa) if p.dpsa is not None else None
    z = dpsa_cache.y if dpsa_cache is not None else concat
    g = conv2d(z, p.cv2)
    return SPPFCache(x, h, y0, pooled, concat, z, g, silu(g), dpsa_cache)


def sppf_forward(x: Tensor, p: SPPFParams) -> Tensor:
    """Plain SPPF; any DPSA parameters on ``p`` are ignored."""
    return sppf_with_cache(x, SPPFParams(p.cv1, p.cv2)).out


def dpsa_sppf_forward(x: Tensor, p: SPPFParams) -> Tensor:
    if p.dpsa is None:
        raise ValueError("dpsa_sppf_forward needs DPSA parameters")
    return sppf_with_cache(x, p).out


def sppf_backward(
    dout: Tensor, cache: SPPFCache, p: SPPFParams, prefix: str = ""
) -> Tuple[Tensor, ParamDict]:
    grads: ParamDict = {}
    cv2 = conv2d_backward(silu_backward(dout, cache.g), cache.z, p.cv2)
    grads[f"{prefix}cv2.weight"] = cv2.dweight
    if cv2.dbias is not None:
        grads[f"{prefix}cv2.bias"] = cv2.dbias

    dconcat = cv2.dx
    if cache.dpsa is not None:
        dconcat, dpsa_grads = dpsa_backward(dconcat, cache.dpsa, p.dpsa, f"{prefix}dpsa.")
        grads.update(dpsa_grads)

    parts = channel_split(dconcat, [p.hidden] * (len(POOL_KERNELS) + 1))
    dy0 = parts[0].copy()
    for k, dpool in zip(POOL_KERNELS, parts[1:]):
        dy0 += maxpool2d_backward(dpool, cache.y0, k, 1, k // 2)

    cv1 = conv2d_backward(silu_backward(dy0, cache.h), cache.x, p.cv1)
    grads[f"{prefix}cv1.weight"] = cv1.dweight
    if cv1.dbias is not None:
        grads[f"{prefix}cv1.bias"] = cv1.dbias
    return cv1.dx, grads
