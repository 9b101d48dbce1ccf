"""Image carrier and PNG / PPM file access.

Images are ``H×W×3`` float32 arrays in RGB order with values in [0, 1].
Planes are ``H×W`` float64 arrays used inside the filters.
"""

from pathlib import Path
from typing import Union

import cv2
import numpy as np
import numpy.typing as npt

from ..common.exceptions import ImageError, ImageIOError

ImageF32 = npt.NDArray[np.float32]
Plane = npt.NDArray[np.float64]

SUPPORTED_SUFFIXES = (".png", ".ppm")


def check_image(img: np.ndarray, what: str = "image") -> None:
    if img.ndim != 3 or img.shape[2] != 3:
        raise ImageError(f"{what} must be H×W×3, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ImageError(f"{what} is empty: {img.shape}")


def to_image(arr: np.ndarray) -> ImageF32:
    """Clip to [0, 1] and store as float32."""
    return np.clip(arr, 0.0, 1.0).astype(np.float32)


def read_image(path: Union[str, Path]) -> ImageF32:
    path = Path(path)
    if path.suffix.lower() not in SUPPORTED_SUFFIXES:
        raise ImageIOError(f"{path}: unsupported image type '{path.suffix}'")
    bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if bgr is None:
        raise ImageIOError(f"{path}: cannot read image")
    rgb = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
    return rgb.astype(np.float32) / 255.0


def write_image(path: Union[str, Path], img: ImageF32) -> None:
    """Write an 8-bit RGB PNG or PPM (P6), depending on the suffix."""
    path = Path(path)
    check_image(img)
    if path.suffix.lower() not in SUPPORTED_SUFFIXES:
        raise ImageIOError(f"{path}: unsupported image type '{path.suffix}'")
    path.parent.mkdir(parents=True, exist_ok=True)
    q = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    if not cv2.imwrite(str(path), cv2.cvtColor(q, cv2.COLOR_RGB2BGR)):
        raise ImageIOError(f"{path}: cannot write image")
