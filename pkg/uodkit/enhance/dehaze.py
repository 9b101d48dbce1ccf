"""Soft-guided dehazing with a Gaussian-smoothed dark-channel veil."""

import numpy as np
from loguru import logger

from ..common.config import EnhanceConfig
from .filters import gaussian_blur
from .image import ImageF32, Plane, check_image, to_image

AIRLIGHT_FRACTION = 0.001


def veil(img: ImageF32, cfg: EnhanceConfig) -> Plane:
    h, w = img.shape[:2]
    sigma = max(h, w) / cfg.dehaze_sigma_divisor
    return gaussian_blur(img.astype(np.float64).min(axis=2), sigma)


def airlight(img: ImageF32, v: Plane) -> np.ndarray:
    """Mean color of the pixels with the brightest veil (top 0.1%, at least one)."""
    flat_v = v.ravel()
    count = max(1, int(flat_v.size * AIRLIGHT_FRACTION))
    top = np.argsort(-flat_v, kind="stable")[:count]
    return img.reshape(-1, 3).astype(np.float64)[top].mean(axis=0)


def transmission(v: Plane, cfg: EnhanceConfig) -> Plane:
    return np.maximum(1.0 - cfg.dehaze_omega * v, cfg.dehaze_t_floor)


def soft_guided_dehaze(img: ImageF32, cfg: EnhanceConfig) -> ImageF32:
    check_image(img)
    v = veil(img, cfg)
    a = airlight(img, v)
    t = transmission(v, cfg)
    logger.debug(f"dehaze airlight={a.round(4).tolist()} t_min={float(t.min()):.4f}")
    x = img.astype(np.float64)
    # J = (I - A)/t + A, written so that t == 1 returns I unchanged.
    scale = (1.0 / t - 1.0)[..., None]
    return to_image(x + (x - a) * scale)
