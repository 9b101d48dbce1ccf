"""Plane filters: separable Gaussian blur, box mean and the guided filter."""

import math

import numpy as np
from scipy import ndimage

from ..common.exceptions import ImageError, ShapeMismatchError
from .image import Plane


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled Gaussian of radius ceil(3σ), normalized to sum 1."""
    if sigma <= 0:
        raise ImageError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def gaussian_blur(plane: Plane, sigma: float) -> Plane:
    """Separable Gaussian blur with clamp-to-edge borders."""
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(np.asarray(plane, dtype=np.float64), k, axis=0, mode="nearest")
    return ndimage.correlate1d(out, k, axis=1, mode="nearest")


def box_mean(plane: Plane, r: int) -> Plane:
    """Mean over the (2r+1)² window, restricted to pixels inside the image."""
    size = 2 * r + 1
    plane = np.asarray(plane, dtype=np.float64)
    total = ndimage.uniform_filter(plane, size=size, mode="constant", cval=0.0)
    count = ndimage.uniform_filter(np.ones_like(plane), size=size, mode="constant", cval=0.0)
    return total / count


def guided_filter(guide: Plane, src: Plane, r: int, eps: float) -> Plane:
    if guide.shape != src.shape:
        raise ShapeMismatchError("shape", guide.shape, src.shape, "guided_filter")
    if r < 1 or eps <= 0:
        raise ImageError(f"guided_filter needs r >= 1 and eps > 0, got r={r}, eps={eps}")
    mean_i = box_mean(guide, r)
    mean_p = box_mean(src, r)
    cov_ip = box_mean(guide * src, r) - mean_i * mean_p
    var_i = box_mean(guide * guide, r) - mean_i * mean_i
    a = cov_ip / (var_i + eps)
    b = mean_p - a * mean_i
    return box_mean(a, r) * guide + box_mean(b, r)
