"""sRGB ↔ CIELAB (D65) conversion and gray-world color correction."""

import cv2
import numpy as np
import numpy.typing as npt

from ..common.config import EnhanceConfig
from .image import ImageF32, check_image, to_image

LabImage = npt.NDArray[np.float32]


def srgb_to_lab(img: ImageF32) -> LabImage:
    """L in [0, 100], a and b roughly in [-128, 127]."""
    check_image(img)
    return cv2.cvtColor(np.ascontiguousarray(img, dtype=np.float32), cv2.COLOR_RGB2LAB)


def lab_to_srgb(lab: LabImage) -> ImageF32:
    """Inverse of ``srgb_to_lab``; out-of-gamut values are clipped to [0, 1]."""
    return to_image(cv2.cvtColor(np.ascontiguousarray(lab, dtype=np.float32), cv2.COLOR_LAB2RGB))


def channel_gains(img: ImageF32, cfg: EnhanceConfig) -> tuple[float, float]:
    """Red and blue gains that pull the channel means toward the green mean."""
    means = img.reshape(-1, 3).astype(np.float64).mean(axis=0)
    mu_r, mu_g, mu_b = (float(m) for m in means)
    g_r = float(np.clip(mu_g / max(mu_r, 1e-6), *cfg.red_gain_clamp))
    g_b = float(np.clip(mu_g / max(mu_b, 1e-6), *cfg.blue_gain_clamp))
    return g_r, g_b


def color_correct(img: ImageF32, cfg: EnhanceConfig) -> ImageF32:
    check_image(img)
    g_r, g_b = channel_gains(img, cfg)
    out = img.astype(np.float64)
    out[..., 0] *= g_r
    out[..., 2] *= g_b
    return to_image(out)
