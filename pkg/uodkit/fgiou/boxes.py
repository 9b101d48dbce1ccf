"""Axis-aligned boxes in corner form, IoU and the GIoU loss with its gradient.

All functions take arrays whose last axis is ``(x1, y1, x2, y2)`` and
broadcast over the leading axes.
"""

from typing import NamedTuple, Tuple

import numpy as np
import numpy.typing as npt

from ..common.exceptions import InvalidBoxError

Boxes = npt.NDArray[np.floating]


class Box(NamedTuple):
    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


def as_boxes(boxes) -> Boxes:
    arr = np.asarray(boxes, dtype=np.float64)
    if arr.shape[-1:] != (4,):
        raise InvalidBoxError(f"boxes need a trailing axis of 4, got shape {arr.shape}")
    return arr


def validate_boxes(boxes) -> Boxes:
    arr = as_boxes(boxes)
    if not np.all(np.isfinite(arr)):
        raise InvalidBoxError("box coordinates must be finite")
    bad = (arr[..., 2] < arr[..., 0]) | (arr[..., 3] < arr[..., 1])
    if np.any(bad):
        raise InvalidBoxError(f"box with x2 < x1 or y2 < y1: {arr[bad][0].tolist()}")
    return arr


def box_area(boxes: Boxes) -> np.ndarray:
    return (boxes[..., 2] - boxes[..., 0]) * (boxes[..., 3] - boxes[..., 1])


def _terms(a: Boxes, b: Boxes):
    """Intersection, union and hull areas plus the side lengths they came from."""
    iw = np.maximum(0.0, np.minimum(a[..., 2], b[..., 2]) - np.maximum(a[..., 0], b[..., 0]))
    ih = np.maximum(0.0, np.minimum(a[..., 3], b[..., 3]) - np.maximum(a[..., 1], b[..., 1]))
    inter = iw * ih
    union = box_area(a) + box_area(b) - inter
    cw = np.maximum(a[..., 2], b[..., 2]) - np.minimum(a[..., 0], b[..., 0])
    ch = np.maximum(a[..., 3], b[..., 3]) - np.minimum(a[..., 1], b[..., 1])
    return iw, ih, inter, union, cw, ch, cw * ch


def _indicator(mask: np.ndarray) -> np.ndarray:
    return mask.astype(np.float64)


def _safe_div(num, den):
    return np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)


def iou(a, b) -> np.ndarray:
    """Intersection over union; 0 when the union is empty."""
    a, b = as_boxes(a), as_boxes(b)
    _, _, inter, union, _, _, _ = _terms(a, b)
    return _safe_div(inter, union)


def box_iou_matrix(a, b) -> np.ndarray:
    """Pairwise IoU, shape ``(len(a), len(b))``."""
    a, b = as_boxes(a), as_boxes(b)
    return iou(a[:, None, :], b[None, :, :])


def giou_loss(a, b) -> np.ndarray:
    """1 - GIoU = 2 - IoU - |A∪B| / |C|; two degenerate boxes (empty hull) give 1."""
    a, b = as_boxes(a), as_boxes(b)
    _, _, inter, union, _, _, hull = _terms(a, b)
    return np.where(hull > 0, 2.0 - _safe_div(inter, union) - _safe_div(union, hull), 1.0)


def giou_loss_grad(pred, target, plain_iou: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """Loss per box pair and its gradient w.r.t. the four ``pred`` coordinates.

    With ``plain_iou`` the loss is ``1 - IoU`` instead. An edge of ``pred``
    that exactly coincides with the matching edge of ``target`` contributes no
    gradient through the intersection or hull.
    """
    a, b = as_boxes(pred), as_boxes(target)
    a, b = np.broadcast_arrays(a, b)
    iw, ih, inter, union, cw, ch, hull = _terms(a, b)
    wa = a[..., 2] - a[..., 0]
    ha = a[..., 3] - a[..., 1]

    # d(side)/d(x1, y1, x2, y2) of pred, stacked on the last axis.
    zero = np.zeros_like(iw)
    overlap_x = iw > 0
    overlap_y = ih > 0
    d_iw = np.stack(
        [
            -_indicator((a[..., 0] > b[..., 0]) & overlap_x),
            zero,
            _indicator((a[..., 2] < b[..., 2]) & overlap_x),
            zero,
        ],
        axis=-1,
    )
    d_ih = np.stack(
        [
            zero,
            -_indicator((a[..., 1] > b[..., 1]) & overlap_y),
            zero,
            _indicator((a[..., 3] < b[..., 3]) & overlap_y),
        ],
        axis=-1,
    )
    d_cw = np.stack(
        [-_indicator(a[..., 0] < b[..., 0]), zero, _indicator(a[..., 2] > b[..., 2]), zero], axis=-1
    )
    d_ch = np.stack(
        [zero, -_indicator(a[..., 1] < b[..., 1]), zero, _indicator(a[..., 3] > b[..., 3])], axis=-1
    )
    d_area = np.stack([-ha, -wa, ha, wa], axis=-1)

    d_inter = d_iw * ih[..., None] + d_ih * iw[..., None]
    d_union = d_area - d_inter
    d_hull = d_cw * ch[..., None] + d_ch * cw[..., None]

    has_union = union > 0
    u = np.where(has_union, union, 1.0)[..., None]
    iou_val = _safe_div(inter, union)
    d_iou = np.where(has_union[..., None], (d_inter * u - inter[..., None] * d_union) / u**2, 0.0)

    if plain_iou:
        return 1.0 - iou_val, -d_iou

    has_hull = hull > 0
    c = np.where(has_hull, hull, 1.0)[..., None]
    d_ratio = (d_union * c - union[..., None] * d_hull) / c**2
    loss = np.where(has_hull, 2.0 - iou_val - _safe_div(union, hull), 1.0)
    grad = np.where(has_hull[..., None], -d_iou - d_ratio, 0.0)
    return loss, grad
