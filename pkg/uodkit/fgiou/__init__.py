from .assigner import AssignResult, task_aligned_assign
from .boxes import Box, box_area, box_iou_matrix, giou_loss, giou_loss_grad, iou, validate_boxes
from .losses import bce_terms, focal_from_probs, focal_loss, focal_terms, obj_focal_loss
from .total import (
    AnchorPredictions,
    LossBreakdown,
    PredictionGrads,
    baseline_loss_and_grad,
    baseline_total,
    fgiou_loss_and_grad,
    fgiou_total,
)

__all__ = [
    "AnchorPredictions",
    "AssignResult",
    "Box",
    "LossBreakdown",
    "PredictionGrads",
    "baseline_loss_and_grad",
    "baseline_total",
    "bce_terms",
    "box_area",
    "box_iou_matrix",
    "fgiou_loss_and_grad",
    "fgiou_total",
    "focal_from_probs",
    "focal_loss",
    "focal_terms",
    "giou_loss",
    "giou_loss_grad",
    "iou",
    "obj_focal_loss",
    "task_aligned_assign",
    "validate_boxes",
]
