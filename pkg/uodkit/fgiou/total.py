"""The weighted FGIoU loss, its gradients and the plain BCE/IoU baseline."""

from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional, Tuple

import numpy as np

from ..common.config import FocalParams, LossWeights
from ..numcore import sigmoid
from .assigner import AssignResult, task_aligned_assign
from .boxes import as_boxes, giou_loss_grad
from .losses import bce_terms, focal_terms, one_hot

PROB_CLIP = 1e-15

TermFn = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def logit(p) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=np.float64), PROB_CLIP, 1.0 - PROB_CLIP)
    return np.log(p) - np.log1p(-p)


@dataclass
class AnchorPredictions:
    """Raw head outputs for one image.

    ``anchors`` ``(A, 2)`` centers, ``boxes`` ``(A, 4)`` decoded corners,
    ``cls_logits`` ``(A, C)`` and ``obj_logits`` ``(A,)``.
    """

    anchors: np.ndarray
    boxes: np.ndarray
    cls_logits: np.ndarray
    obj_logits: np.ndarray

    def __post_init__(self):
        self.anchors = np.asarray(self.anchors, dtype=np.float64).reshape(-1, 2)
        self.boxes = as_boxes(self.boxes).reshape(-1, 4)
        self.cls_logits = np.asarray(self.cls_logits, dtype=np.float64)
        self.obj_logits = np.asarray(self.obj_logits, dtype=np.float64).reshape(-1)
        n = len(self.anchors)
        if not (len(self.boxes) == len(self.cls_logits) == len(self.obj_logits) == n):
            raise ValueError(
                f"per-anchor arrays disagree: anchors {n}, boxes {len(self.boxes)}, "
                f"cls {len(self.cls_logits)}, obj {len(self.obj_logits)}"
            )

    @classmethod
    def from_probs(cls, anchors, boxes, cls_probs, obj_probs) -> "AnchorPredictions":
        return cls(anchors, boxes, logit(cls_probs), logit(obj_probs))

    @property
    def num_anchors(self) -> int:
        return len(self.anchors)

    @property
    def cls_probs(self) -> np.ndarray:
        return sigmoid(self.cls_logits)

    @property
    def obj_probs(self) -> np.ndarray:
        return sigmoid(self.obj_logits)


@dataclass(frozen=True)
class LossBreakdown:
    giou: float
    focal: float
    obj_focal: float
    total: float
    num_pos: int

    def as_dict(self) -> dict:
        return {
            "giou": self.giou,
            "focal": self.focal,
            "obj_focal": self.obj_focal,
            "total": self.total,
            "num_pos": self.num_pos,
        }


@dataclass
class PredictionGrads:
    boxes: np.ndarray
    cls_logits: np.ndarray
    obj_logits: np.ndarray


def _composite(
    pred: AnchorPredictions,
    gt_boxes,
    gt_classes,
    w: LossWeights,
    assign: Optional[AssignResult],
    cls_term: TermFn,
    obj_term: TermFn,
    plain_iou: bool,
) -> Tuple[LossBreakdown, PredictionGrads]:
    gt_boxes = np.asarray(gt_boxes, dtype=np.float64).reshape(-1, 4)
    gt_classes = np.asarray(gt_classes, dtype=np.int64).reshape(-1)
    if assign is None:
        assign = task_aligned_assign(pred.cls_probs, pred.boxes, pred.anchors, gt_boxes, gt_classes)
    fg = assign.fg_mask
    num_pos = assign.num_pos
    num_classes = pred.cls_logits.shape[-1]
    pos_den = max(1, num_pos)
    all_den = max(1, pred.num_anchors)

    grads = PredictionGrads(
        boxes=np.zeros_like(pred.boxes),
        cls_logits=np.zeros_like(pred.cls_logits),
        obj_logits=np.zeros_like(pred.obj_logits),
    )

    box_loss = 0.0
    cls_loss = 0.0
    if num_pos:
        targets = gt_boxes[assign.matched_gt[fg]]
        per_box, d_box = giou_loss_grad(pred.boxes[fg], targets, plain_iou=plain_iou)
        box_loss = float(per_box.sum()) / pos_den
        grads.boxes[fg] = w.w_box * d_box / pos_den

        onehot = one_hot(gt_classes[assign.matched_gt[fg]], num_classes)
        per_cls, d_cls = cls_term(pred.cls_logits[fg], onehot)
        cls_loss = float(per_cls.mean(axis=-1).sum()) / pos_den
        grads.cls_logits[fg] = w.w_cls * d_cls / (pos_den * num_classes)

    per_obj, d_obj = obj_term(pred.obj_logits, assign.alignment)
    obj_loss = float(per_obj.sum()) / all_den
    grads.obj_logits[:] = w.w_obj * d_obj / all_den

    total = w.w_box * box_loss + w.w_cls * cls_loss + w.w_obj * obj_loss
    return LossBreakdown(box_loss, cls_loss, obj_loss, total, num_pos), grads


def fgiou_loss_and_grad(
    pred: AnchorPredictions,
    gt_boxes,
    gt_classes,
    fp: FocalParams = FocalParams(),
    w: LossWeights = LossWeights(),
    assign: Optional[AssignResult] = None,
) -> Tuple[LossBreakdown, PredictionGrads]:
    """GIoU + class focal + objectness focal, with gradients w.r.t. the raw outputs.

    The assignment is held fixed while differentiating.
    """
    focal = partial(focal_terms, fp=fp)
    return _composite(pred, gt_boxes, gt_classes, w, assign, focal, focal, plain_iou=False)


def fgiou_total(
    pred: AnchorPredictions,
    gt_boxes,
    gt_classes,
    fp: FocalParams = FocalParams(),
    w: LossWeights = LossWeights(),
    assign: Optional[AssignResult] = None,
) -> LossBreakdown:
    return fgiou_loss_and_grad(pred, gt_boxes, gt_classes, fp, w, assign)[0]


def baseline_loss_and_grad(
    pred: AnchorPredictions,
    gt_boxes,
    gt_classes,
    w: LossWeights = LossWeights(),
    assign: Optional[AssignResult] = None,
) -> Tuple[LossBreakdown, PredictionGrads]:
    """BCE objectness + BCE class + (1 - IoU) box on the same assignment.

    The breakdown reuses the FGIoU field names: ``giou`` holds the 1 - IoU term.
    """
    return _composite(pred, gt_boxes, gt_classes, w, assign, bce_terms, bce_terms, plain_iou=True)


def baseline_total(
    pred: AnchorPredictions,
    gt_boxes,
    gt_classes,
    w: LossWeights = LossWeights(),
    assign: Optional[AssignResult] = None,
) -> LossBreakdown:
    return baseline_loss_and_grad(pred, gt_boxes, gt_classes, w, assign)[0]
