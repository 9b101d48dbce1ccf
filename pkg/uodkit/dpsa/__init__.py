from .attention import (
    channel_attention,
    channel_attention_backward,
    channel_attention_with_cache,
    dpsa_backward,
    dpsa_forward,
    dpsa_with_cache,
    spatial_attention,
    spatial_attention_backward,
    spatial_attention_with_cache,
)
from .params import (
    POOL_KERNELS,
    ChannelAttentionParams,
    DPSAParams,
    DPSASPPFParams,
    SpatialAttentionParams,
    SPPFParams,
    init_channel_attention,
    init_dpsa,
    init_spatial_attention,
    init_sppf,
)
from .sppf import dpsa_sppf_forward, sppf_backward, sppf_forward, sppf_with_cache

__all__ = [
    "POOL_KERNELS",
    "ChannelAttentionParams",
    "DPSAParams",
    "DPSASPPFParams",
    "SPPFParams",
    "SpatialAttentionParams",
    "channel_attention",
    "channel_attention_backward",
    "channel_attention_with_cache",
    "dpsa_backward",
    "dpsa_forward",
    "dpsa_sppf_forward",
    "dpsa_with_cache",
    "init_channel_attention",
    "init_dpsa",
    "init_spatial_attention",
    "init_sppf",
    "spatial_attention",
    "spatial_attention_backward",
    "spatial_attention_with_cache",
    "sppf_backward",
    "sppf_forward",
    "sppf_with_cache",
]
