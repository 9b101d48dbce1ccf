"""A tiny single-scale anchor-free detector with an SPPF / DPSA_SPPF neck.

Head channels per cell: ``[obj, cls_0 .. cls_{C-1}, dx, dy, dw, dh]``.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..common.exceptions import InputSizeError, ShapeMismatchError
from ..dpsa import SPPFParams, init_sppf, sppf_backward, sppf_with_cache
from ..dpsa.sppf import SPPFCache
from ..fgiou import AnchorPredictions, PredictionGrads
from ..numcore import (
    PRODUCTION_DTYPE,
    ConvParams,
    ParamDict,
    Tensor,
    conv2d,
    conv2d_backward,
    init_conv,
    silu,
    silu_backward,
)
from .synth import CLASS_NAMES, IMAGE_SIZE

STRIDE = 4
GRID = IMAGE_SIZE // STRIDE
WIDTHS = (8, 16, 32)
DELTA_CLAMP = 4.0
# sigmoid(-4.6) ~ 0.01: start with every cell confidently background.
SCORE_PRIOR = -4.6
# He-uniform bound sqrt(6/fan_in) for the unnormalized conv + SiLU stages.
BACKBONE_GAIN = float(np.sqrt(6.0))
BOX_CHANNELS = 4


@dataclass
class ToyNetParams:
    stem: ConvParams
    down1: ConvParams
    down2: ConvParams
    sppf: SPPFParams
    head: ConvParams

    @property
    def num_classes(self) -> int:
        return self.head.out_channels - 1 - BOX_CHANNELS

    @property
    def uses_dpsa(self) -> bool:
        return self.sppf.dpsa is not None

    def named_parameters(self, prefix: str = "") -> ParamDict:
        return {
            **self.stem.named_parameters(f"{prefix}stem."),
            **self.down1.named_parameters(f"{prefix}down1."),
            **self.down2.named_parameters(f"{prefix}down2."),
            **self.sppf.named_parameters(f"{prefix}sppf."),
            **self.head.named_parameters(f"{prefix}head."),
        }

    def astype(self, dtype) -> "ToyNetParams":
        return ToyNetParams(
            self.stem.astype(dtype),
            self.down1.astype(dtype),
            self.down2.astype(dtype),
            self.sppf.astype(dtype),
            self.head.astype(dtype),
        )


def init_toynet(
    rng: np.random.Generator,
    use_dpsa: bool = True,
    num_classes: int = len(CLASS_NAMES),
    dtype=PRODUCTION_DTYPE,
) -> ToyNetParams:
    c0, c1, c2 = WIDTHS
    g = BACKBONE_GAIN
    stem = init_conv(rng, 3, c0, kernel=3, dtype=dtype, gain=g)
    down1 = init_conv(rng, c0, c1, kernel=3, stride=2, padding=1, dtype=dtype, gain=g)
    down2 = init_conv(rng, c1, c2, kernel=3, stride=2, padding=1, dtype=dtype, gain=g)
    sppf = init_sppf(rng, c2, use_dpsa=use_dpsa, dtype=dtype, gain=g)
    head = init_conv(rng, c2, 1 + num_classes + BOX_CHANNELS, kernel=1, dtype=dtype)
    head.bias[: 1 + num_classes] = SCORE_PRIOR
    return ToyNetParams(stem, down1, down2, sppf, head)


def count_parameters(params: ToyNetParams) -> int:
    return int(sum(v.size for v in params.named_parameters().values()))


@dataclass
class ToyNetCache:
    x: Tensor
    stem_pre: Tensor
    stem: Tensor
    down1_pre: Tensor
    down1: Tensor
    down2_pre: Tensor
    down2: Tensor
    sppf: SPPFCache
    out: Tensor


def _check_input(x: Tensor) -> None:
    if x.ndim != 4:
        raise ShapeMismatchError("ndim", 4, x.ndim, "forward_detect")
    if x.shape[2:] != (IMAGE_SIZE, IMAGE_SIZE):
        raise InputSizeError(
            f"detector expects {IMAGE_SIZE}×{IMAGE_SIZE} inputs, got {x.shape[2]}×{x.shape[3]}"
        )


def forward_with_cache(params: ToyNetParams, x: Tensor) -> ToyNetCache:
    _check_input(x)
    stem_pre = conv2d(x, params.stem)
    stem = silu(stem_pre)
    down1_pre = conv2d(stem, params.down1)
    down1 = silu(down1_pre)
    down2_pre = conv2d(down1, params.down2)
    down2 = silu(down2_pre)
    sppf = sppf_with_cache(down2, params.sppf)
    out = conv2d(sppf.out, params.head)
    return ToyNetCache(x, stem_pre, stem, down1_pre, down1, down2_pre, down2, sppf, out)


def forward_detect(params: ToyNetParams, x: Tensor) -> Tensor:
    """Raw head output of shape ``(N, 1 + C + 4, 16, 16)`` for ``(N, 3, 64, 64)`` input."""
    return forward_with_cache(params, x).out


def _conv_grads(grads: ParamDict, name: str, g) -> None:
    grads[f"{name}.weight"] = g.dweight
    if g.dbias is not None:
        grads[f"{name}.bias"] = g.dbias


def backward(dout: Tensor, cache: ToyNetCache, params: ToyNetParams) -> Tuple[Tensor, ParamDict]:
    """Gradients of ``sum(out * dout)``, keyed like ``params.named_parameters()``."""
    grads: ParamDict = {}
    head = conv2d_backward(dout, cache.sppf.out, params.head)
    _conv_grads(grads, "head", head)
    dx, sppf_grads = sppf_backward(head.dx, cache.sppf, params.sppf, "sppf.")
    grads.update(sppf_grads)
    for name, pre, inp in (
        ("down2", cache.down2_pre, cache.down1),
        ("down1", cache.down1_pre, cache.stem),
        ("stem", cache.stem_pre, cache.x),
    ):
        g = conv2d_backward(silu_backward(dx, pre), inp, getattr(params, name))
        _conv_grads(grads, name, g)
        dx = g.dx
    return dx, grads


def anchor_centers(grid: int = GRID, stride: int = STRIDE) -> np.ndarray:
    """``(grid*grid, 2)`` cell centres in pixels, row-major over (row, col)."""
    ys, xs = np.meshgrid(np.arange(grid), np.arange(grid), indexing="ij")
    return (np.stack([xs.ravel(), ys.ravel()], axis=1) + 0.5) * stride


def decode_boxes(deltas: np.ndarray, anchors: np.ndarray, stride: int = STRIDE) -> np.ndarray:
    """``(A, 4)`` deltas → corner boxes; the width parameterisation keeps x2 ≥ x1."""
    deltas = np.asarray(deltas, dtype=np.float64)
    cx = anchors[:, 0] + np.tanh(deltas[:, 0]) * stride
    cy = anchors[:, 1] + np.tanh(deltas[:, 1]) * stride
    w = stride * np.exp(np.clip(deltas[:, 2], -DELTA_CLAMP, DELTA_CLAMP))
    h = stride * np.exp(np.clip(deltas[:, 3], -DELTA_CLAMP, DELTA_CLAMP))
    return np.stack([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2], axis=1)


def decode_boxes_backward(
    dboxes: np.ndarray, deltas: np.ndarray, stride: int = STRIDE
) -> np.ndarray:
    deltas = np.asarray(deltas, dtype=np.float64)
    dcx = dboxes[:, 0] + dboxes[:, 2]
    dcy = dboxes[:, 1] + dboxes[:, 3]
    dw = (dboxes[:, 2] - dboxes[:, 0]) / 2
    dh = (dboxes[:, 3] - dboxes[:, 1]) / 2
    out = np.empty_like(deltas)
    out[:, 0] = dcx * stride * (1.0 - np.tanh(deltas[:, 0]) ** 2)
    out[:, 1] = dcy * stride * (1.0 - np.tanh(deltas[:, 1]) ** 2)
    for col, d in ((2, dw), (3, dh)):
        z = deltas[:, col]
        active = np.abs(z) < DELTA_CLAMP
        scale = stride * np.exp(np.clip(z, -DELTA_CLAMP, DELTA_CLAMP))
        out[:, col] = np.where(active, d * scale, 0.0)
    return out


def _cells(raw: Tensor) -> np.ndarray:
    """``(N, K, H, W)`` → ``(N, H*W, K)`` in float64."""
    n, k = raw.shape[:2]
    return np.asarray(raw, dtype=np.float64).reshape(n, k, -1).transpose(0, 2, 1)


def decode(raw: Tensor) -> List[AnchorPredictions]:
    """One :class:`AnchorPredictions` per image of a raw head batch."""
    cells = _cells(raw)
    num_classes = raw.shape[1] - 1 - BOX_CHANNELS
    anchors = anchor_centers(raw.shape[2])
    return [
        AnchorPredictions(
            anchors=anchors,
            boxes=decode_boxes(c[:, 1 + num_classes :], anchors),
            cls_logits=c[:, 1 : 1 + num_classes],
            obj_logits=c[:, 0],
        )
        for c in cells
    ]


def decode_backward(grads: List[PredictionGrads], raw: Tensor) -> Tensor:
    """Scatter per-image prediction gradients back onto the raw head layout."""
    cells = _cells(raw)
    num_classes = raw.shape[1] - 1 - BOX_CHANNELS
    dcells = np.empty_like(cells)
    for i, (g, c) in enumerate(zip(grads, cells)):
        dcells[i, :, 0] = g.obj_logits
        dcells[i, :, 1 : 1 + num_classes] = g.cls_logits
        dcells[i, :, 1 + num_classes :] = decode_boxes_backward(g.boxes, c[:, 1 + num_classes :])
    return dcells.transpose(0, 2, 1).reshape(raw.shape).astype(raw.dtype)
