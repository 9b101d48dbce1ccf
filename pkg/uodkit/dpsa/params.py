"""Parameter containers and seeded initializers for the attention blocks."""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..numcore import PRODUCTION_DTYPE, ConvParams, ParamDict, init_conv

REDUCTION_RATIO = 16
SPATIAL_KERNEL = 7
POOL_KERNELS: Tuple[int, ...] = (5, 9, 13)


def hidden_width(channels: int, r: int = REDUCTION_RATIO) -> int:
    return max(1, channels // r)


@dataclass
class ChannelAttentionParams:
    """Shared two-layer 1×1 MLP; the avg and max branches use the same weights."""

    reduce: ConvParams
    expand: ConvParams
    r: int = REDUCTION_RATIO

    @property
    def channels(self) -> int:
        return self.reduce.in_channels

    def named_parameters(self, prefix: str = "") -> ParamDict:
        return {
            **self.reduce.named_parameters(f"{prefix}reduce."),
            **self.expand.named_parameters(f"{prefix}expand."),
        }

    def astype(self, dtype) -> "ChannelAttentionParams":
        return ChannelAttentionParams(self.reduce.astype(dtype), self.expand.astype(dtype), self.r)


@dataclass
class SpatialAttentionParams:
    conv: ConvParams

    def __post_init__(self):
        if self.conv.kernel_size != (SPATIAL_KERNEL, SPATIAL_KERNEL) or self.conv.in_channels != 2:
            raise ValueError(
                f"spatial attention needs a 2→1 {SPATIAL_KERNEL}×{SPATIAL_KERNEL} conv, "
                f"got weight {self.conv.weight.shape}"
            )

    def named_parameters(self, prefix: str = "") -> ParamDict:
        return self.conv.named_parameters(f"{prefix}conv.")

    def astype(self, dtype) -> "SpatialAttentionParams":
        return SpatialAttentionParams(self.conv.astype(dtype))


@dataclass
class DPSAParams:
    channel: ChannelAttentionParams
    spatial: SpatialAttentionParams

    def named_parameters(self, prefix: str = "") -> ParamDict:
        return {
            **self.channel.named_parameters(f"{prefix}channel."),
            **self.spatial.named_parameters(f"{prefix}spatial."),
        }

    def astype(self, dtype) -> "DPSAParams":
        return DPSAParams(self.channel.astype(dtype), self.spatial.astype(dtype))


@dataclass
class SPPFParams:
    """cv1 (1×1, C_in→C_hidden) and cv2 (1×1, 4·C_hidden→C_out) around the pools.

    With ``dpsa`` set this is the DPSA_SPPF block; without it the plain SPPF
    used by the ablation baseline.
    """

    cv1: ConvParams
    cv2: ConvParams
    dpsa: Optional[DPSAParams] = None

    def __post_init__(self):
        concat = len(POOL_KERNELS) + 1
        if self.cv2.in_channels != concat * self.cv1.out_channels:
            raise ValueError(
                f"cv2 expects {self.cv2.in_channels} channels, "
                f"concat gives {concat * self.cv1.out_channels}"
            )
        if self.dpsa is not None and self.dpsa.channel.channels != self.cv2.in_channels:
            raise ValueError("DPSA channel count must match the concatenated pools")

    @property
    def hidden(self) -> int:
        return self.cv1.out_channels

    def named_parameters(self, prefix: str = "") -> ParamDict:
        params = {
            **self.cv1.named_parameters(f"{prefix}cv1."),
            **self.cv2.named_parameters(f"{prefix}cv2."),
        }
        if self.dpsa is not None:
            params.update(self.dpsa.named_parameters(f"{prefix}dpsa."))
        return params

    def astype(self, dtype) -> "SPPFParams":
        return SPPFParams(
            self.cv1.astype(dtype),
            self.cv2.astype(dtype),
            None if self.dpsa is None else self.dpsa.astype(dtype),
        )


# DPSA_SPPF is an SPPFParams whose ``dpsa`` is set.
DPSASPPFParams = SPPFParams


def init_channel_attention(
    rng: np.random.Generator, channels: int, r: int = REDUCTION_RATIO, dtype=PRODUCTION_DTYPE
) -> ChannelAttentionParams:
    hidden = hidden_width(channels, r)
    return ChannelAttentionParams(
        reduce=init_conv(rng, channels, hidden, kernel=1, dtype=dtype),
        expand=init_conv(rng, hidden, channels, kernel=1, dtype=dtype),
        r=r,
    )


def init_spatial_attention(
    rng: np.random.Generator, dtype=PRODUCTION_DTYPE
) -> SpatialAttentionParams:
    return SpatialAttentionParams(
        conv=init_conv(rng, 2, 1, kernel=SPATIAL_KERNEL, padding=SPATIAL_KERNEL // 2, dtype=dtype)
    )


def init_dpsa(rng: np.random.Generator, channels: int, dtype=PRODUCTION_DTYPE) -> DPSAParams:
    return DPSAParams(
        channel=init_channel_attention(rng, channels, dtype=dtype),
        spatial=init_spatial_attention(rng, dtype=dtype),
    )


def init_sppf(
    rng: np.random.Generator,
    c_in: int,
    c_out: Optional[int] = None,
    use_dpsa: bool = True,
    dtype=PRODUCTION_DTYPE,
    gain: float = 1.0,
) -> SPPFParams:
    """C_hidden = max(1, C_in // 2); C_out defaults to C_in.

    ``gain`` scales the cv1 and cv2 init; the attention layers keep the plain bound.
    """
    hidden = max(1, c_in // 2)
    c_out = c_in if c_out is None else c_out
    concat = (len(POOL_KERNELS) + 1) * hidden
    cv1 = init_conv(rng, c_in, hidden, kernel=1, dtype=dtype, gain=gain)
    dpsa = init_dpsa(rng, concat, dtype=dtype) if use_dpsa else None
    cv2 = init_conv(rng, concat, c_out, kernel=1, dtype=dtype, gain=gain)
    return SPPFParams(cv1=cv1, cv2=cv2, dpsa=dpsa)
