"""Task-aligned label assignment for an anchor-free grid head."""

from dataclasses import dataclass

import numpy as np
from loguru import logger

from .boxes import as_boxes, box_iou_matrix, validate_boxes

TOPK = 10
SCORE_POWER = 0.5
IOU_POWER = 6.0
NORM_EPS = 1e-9


@dataclass
class AssignResult:
    """Per-anchor assignment. ``matched_gt`` is -1 and ``alignment`` 0 on background."""

    fg_mask: np.ndarray
    matched_gt: np.ndarray
    alignment: np.ndarray

    @property
    def num_pos(self) -> int:
        return int(self.fg_mask.sum())

    @classmethod
    def background(cls, num_anchors: int) -> "AssignResult":
        return cls(
            fg_mask=np.zeros(num_anchors, dtype=bool),
            matched_gt=np.full(num_anchors, -1, dtype=np.int64),
            alignment=np.zeros(num_anchors),
        )


def centers_inside(anchors: np.ndarray, gt_boxes: np.ndarray) -> np.ndarray:
    """``(G, A)`` mask of anchor centers strictly inside each gt box."""
    cx = anchors[None, :, 0]
    cy = anchors[None, :, 1]
    g = gt_boxes[:, None, :]
    return (cx > g[..., 0]) & (cx < g[..., 2]) & (cy > g[..., 1]) & (cy < g[..., 3])


def alignment_metric(scores, ious):
    return np.power(scores, SCORE_POWER) * np.power(ious, IOU_POWER)


def task_aligned_assign(
    scores,
    boxes,
    anchors,
    gt_boxes,
    gt_classes,
    topk: int = TOPK,
) -> AssignResult:
    """Match anchors to ground truths by ``s^0.5 * IoU^6``.

    ``scores`` is ``(A, C)`` class probabilities, ``boxes`` the ``(A, 4)``
    predicted corners and ``anchors`` the ``(A, 2)`` centers. Each gt keeps its
    ``topk`` best candidates; an anchor claimed twice goes to the larger metric,
    ties to the lower gt index.
    """
    scores = np.asarray(scores, dtype=np.float64)
    boxes = as_boxes(boxes)
    anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 2)
    gt_boxes = validate_boxes(np.asarray(gt_boxes, dtype=np.float64).reshape(-1, 4))
    gt_classes = np.asarray(gt_classes, dtype=np.int64).reshape(-1)
    num_anchors = anchors.shape[0]
    if len(gt_boxes) != len(gt_classes):
        raise ValueError(f"{len(gt_boxes)} gt boxes but {len(gt_classes)} classes")
    if len(gt_boxes) == 0:
        return AssignResult.background(num_anchors)

    inside = centers_inside(anchors, gt_boxes)
    ious = box_iou_matrix(gt_boxes, boxes)
    metric = np.where(inside, alignment_metric(scores[:, gt_classes].T, ious), 0.0)

    candidate = np.zeros_like(inside)
    for g in range(len(gt_boxes)):
        idx = np.flatnonzero(inside[g])
        order = np.argsort(-metric[g, idx], kind="stable")
        candidate[g, idx[order[:topk]]] = True

    claimed = np.where(candidate, metric, -np.inf)
    fg_mask = candidate.any(axis=0)
    matched = np.where(fg_mask, np.argmax(claimed, axis=0), -1)

    alignment = np.zeros(num_anchors)
    for g in range(len(gt_boxes)):
        mine = matched == g
        if not mine.any():
            continue
        m = metric[g, mine]
        alignment[mine] = m / (m.max() + NORM_EPS) * ious[g, mine].max()

    logger.debug(
        f"assigned {int(fg_mask.sum())}/{num_anchors} anchors to {len(gt_boxes)} gts "
        f"(mean alignment {alignment[fg_mask].mean() if fg_mask.any() else 0.0:.3f})"
    )
    return AssignResult(fg_mask=fg_mask, matched_gt=matched.astype(np.int64), alignment=alignment)
