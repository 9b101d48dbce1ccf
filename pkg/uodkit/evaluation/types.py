import math
from dataclasses import dataclass
from typing import Tuple, Union

from ..common.exceptions import InvalidBoxError
from ..fgiou.boxes import validate_boxes

BoxTuple = Tuple[float, float, float, float]
ImageId = Union[int, str]


def _check_box(box) -> BoxTuple:
    return tuple(float(v) for v in validate_boxes(box))


@dataclass(frozen=True)
class Detection:
    """One scored box produced by a detector."""

    image_id: ImageId
    class_id: int
    score: float
    box: BoxTuple

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise InvalidBoxError(f"detection score must be finite, got {self.score}")
        object.__setattr__(self, "box", _check_box(self.box))


@dataclass(frozen=True)
class GroundTruth:
    image_id: ImageId
    class_id: int
    box: BoxTuple

    def __post_init__(self):
        object.__setattr__(self, "box", _check_box(self.box))


@dataclass(frozen=True)
class PRPoint:
    """Recall and precision once every detection scoring at least ``score_threshold`` is kept."""

    recall: float
    precision: float
    score_threshold: float
