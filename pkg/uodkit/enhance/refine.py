import numpy as np

from ..common.config import EnhanceConfig
from .filters import gaussian_blur, guided_filter
from .image import ImageF32, check_image, to_image

UNSHARP_SIGMA = 1.0


def edge_refine(img: ImageF32, cfg: EnhanceConfig) -> ImageF32:
    """Self-guided denoise per channel, then an unsharp boost of the boundaries."""
    check_image(img)
    out = np.empty(img.shape, dtype=np.float64)
    for c in range(3):
        plane = img[..., c].astype(np.float64)
        q = guided_filter(plane, plane, cfg.guided_radius, cfg.guided_eps)
        out[..., c] = q + cfg.sharpen_beta * (q - gaussian_blur(q, UNSHARP_SIGMA))
    return to_image(out)
