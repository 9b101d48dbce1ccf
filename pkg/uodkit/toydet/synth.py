"""Seeded synthetic scenes: coloured shapes on a blue-green gradient."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..enhance.image import ImageF32
from ..fgiou.boxes import Box, box_iou_matrix

IMAGE_SIZE = 64
CLASS_NAMES: Tuple[str, ...] = ("disc", "square", "triangle")
MIN_SIDE = 8
MAX_SIDE = 20
MAX_OBJECTS = 4
NOISE_SIGMA = 0.03
MAX_OVERLAP = 0.2
PLACEMENT_TRIES = 30

BACKGROUND_TOP = np.array([0.55, 0.64, 0.70])
BACKGROUND_BOTTOM = np.array([0.42, 0.52, 0.60])
CLASS_COLORS = np.array(
    [
        [0.92, 0.28, 0.22],  # disc
        [0.94, 0.86, 0.28],  # square
        [0.82, 0.32, 0.84],  # triangle
    ]
)

LabeledBox = Tuple[int, Box]


@dataclass
class SynthSample:
    image: ImageF32
    objects: List[LabeledBox]
    seed: Optional[int] = None
    image_id: str = field(default="")

    @property
    def boxes(self) -> np.ndarray:
        return np.array([box for _, box in self.objects], dtype=np.float64).reshape(-1, 4)

    @property
    def classes(self) -> np.ndarray:
        return np.array([c for c, _ in self.objects], dtype=np.int64)


def _background(size: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, size)[:, None, None]
    column = (1.0 - t) * BACKGROUND_TOP + t * BACKGROUND_BOTTOM
    return np.broadcast_to(column, (size, size, 3)).copy()


def shape_mask(class_id: int, box: Box, size: int = IMAGE_SIZE) -> np.ndarray:
    """Pixels whose centres fall inside the shape inscribed in ``box``."""
    yy, xx = np.mgrid[0:size, 0:size] + 0.5
    x1, y1, x2, y2 = box
    cx, cy = (x1 + x2) / 2, (y1 + y2) / 2
    if CLASS_NAMES[class_id] == "disc":
        r = (x2 - x1) / 2
        return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    inside = (xx >= x1) & (xx < x2) & (yy >= y1) & (yy < y2)
    if CLASS_NAMES[class_id] == "square":
        return inside
    # apex at top centre, base along the bottom edge
    half = (x2 - x1) / 2
    rel = (yy - y1) / (y2 - y1)
    return inside & (np.abs(xx - cx) <= half * rel)


def _place(rng: np.random.Generator, placed: List[Box]) -> Optional[Box]:
    for _ in range(PLACEMENT_TRIES):
        side = int(rng.integers(MIN_SIDE, MAX_SIDE + 1))
        x1 = int(rng.integers(0, IMAGE_SIZE - side + 1))
        y1 = int(rng.integers(0, IMAGE_SIZE - side + 1))
        box = Box(float(x1), float(y1), float(x1 + side), float(y1 + side))
        if not placed or box_iou_matrix(np.array([box]), np.array(placed)).max() < MAX_OVERLAP:
            return box
    return None


def synth_sample(seed: int, image_id: str = "") -> SynthSample:
    rng = np.random.default_rng(seed)
    img = _background(IMAGE_SIZE)
    objects: List[LabeledBox] = []
    for _ in range(int(rng.integers(1, MAX_OBJECTS + 1))):
        class_id = int(rng.integers(len(CLASS_NAMES)))
        box = _place(rng, [b for _, b in objects])
        if box is None:
            continue
        img[shape_mask(class_id, box)] = CLASS_COLORS[class_id]
        objects.append((class_id, box))
    img += rng.normal(scale=NOISE_SIGMA, size=img.shape)
    return SynthSample(np.clip(img, 0.0, 1.0).astype(np.float32), objects, seed, image_id)


def sample_seeds(n: int, seed: int) -> List[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def synth_dataset(n: int, seed: int, workers: int = 1) -> List[SynthSample]:
    """``n`` samples, identical for identical ``(n, seed)`` whatever ``workers`` is."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    seeds = sample_seeds(n, seed)
    ids = [f"{i:05d}" for i in range(n)]
    if workers <= 1:
        return [synth_sample(s, i) for s, i in zip(seeds, ids)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(synth_sample, seeds, ids))
