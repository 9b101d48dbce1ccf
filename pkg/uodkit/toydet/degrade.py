"""Underwater-style degradation: colour cast, haze, blur and flattened contrast."""

import numpy as np

from ..enhance.color import lab_to_srgb, srgb_to_lab
from ..enhance.filters import gaussian_blur
from ..enhance.image import ImageF32, check_image, to_image

RED_SCALE = 0.4
BLUE_SCALE = 0.85
HAZE = 0.25
HAZE_AIRLIGHT = np.array([0.7, 0.9, 0.9])
BLUR_SIGMA = 0.8
CONTRAST = 0.6
SENSOR_NOISE = 0.005


def degrade_underwater(img: ImageF32, seed: int) -> ImageF32:
    """Deterministic for a given ``(img, seed)``; the seed drives only the sensor noise."""
    check_image(img)
    x = img.astype(np.float64)
    x[..., 0] *= RED_SCALE
    x[..., 2] *= BLUE_SCALE
    x = (1.0 - HAZE) * x + HAZE * HAZE_AIRLIGHT
    x = np.stack([gaussian_blur(x[..., c], BLUR_SIGMA) for c in range(3)], axis=-1)

    lab = srgb_to_lab(to_image(x))
    lum = lab[..., 0]
    lab[..., 0] = lum.mean() + CONTRAST * (lum - lum.mean())
    x = lab_to_srgb(lab).astype(np.float64)

    x += np.random.default_rng(seed).normal(scale=SENSOR_NOISE, size=x.shape)
    return to_image(x)
