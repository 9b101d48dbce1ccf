"""Contrast-limited adaptive histogram equalization on the Lab luminance."""

import cv2
import numpy as np

from ..common.config import EnhanceConfig
from .color import lab_to_srgb, srgb_to_lab
from .image import ImageF32, Plane, check_image

L_BINS = 256


def tile_grid(shape: tuple[int, int], tiles: tuple[int, int]) -> tuple[int, int]:
    """(rows, cols) grid, shrunk so no tile is smaller than one pixel."""
    return min(tiles[0], shape[0]), min(tiles[1], shape[1])


def equalize_luminance(lum: Plane, clip: float, tiles: tuple[int, int]) -> Plane:
    """CLAHE on an L plane in [0, 100]; returns the equalized plane on the same scale.

    Each tile histogram is clipped at ``clip`` times the mean bin count and the
    excess spread over all bins; per-pixel values blend the four neighbouring
    tile mappings bilinearly.
    """
    rows, cols = tile_grid(lum.shape, tiles)
    q = np.round(np.clip(lum, 0.0, 100.0) * (L_BINS - 1) / 100.0).astype(np.uint8)
    # OpenCV takes the grid as (width, height) in tiles.
    clahe = cv2.createCLAHE(clipLimit=float(clip), tileGridSize=(cols, rows))
    return clahe.apply(q).astype(np.float64) * 100.0 / (L_BINS - 1)


def clahe_luminance(img: ImageF32, cfg: EnhanceConfig) -> ImageF32:
    check_image(img)
    lab = srgb_to_lab(img)
    lab[..., 0] = equalize_luminance(lab[..., 0], cfg.clahe_clip, cfg.clahe_tiles)
    return lab_to_srgb(lab)
