"""Turning raw head predictions into scored detections."""

from typing import List, Sequence

import numpy as np

from ..evaluation import Detection
from ..fgiou import AnchorPredictions, box_iou_matrix
from .synth import IMAGE_SIZE


def nms(boxes: np.ndarray, scores: np.ndarray, iou_thresh: float) -> List[int]:
    """Greedy NMS; returns kept indices by descending score (ties by index)."""
    order = np.argsort(-scores, kind="stable")
    keep: List[int] = []
    suppressed = np.zeros(len(order), dtype=bool)
    ious = box_iou_matrix(boxes[order], boxes[order]) if len(order) else np.zeros((0, 0))
    for rank, idx in enumerate(order):
        if suppressed[rank]:
            continue
        keep.append(int(idx))
        suppressed |= ious[rank] > iou_thresh
    return keep


def to_detections(
    pred: AnchorPredictions,
    image_id,
    conf_threshold: float = 0.001,
    nms_iou: float = 0.5,
    max_detections: int = 100,
) -> List[Detection]:
    """Best class per cell scored ``obj * cls``, thresholded, per-class NMS, top-k."""
    cls_probs = pred.cls_probs
    class_ids = np.argmax(cls_probs, axis=1)
    scores = pred.obj_probs * cls_probs[np.arange(len(class_ids)), class_ids]
    boxes = np.clip(pred.boxes, 0.0, float(IMAGE_SIZE))

    kept = []
    for c in np.unique(class_ids):
        idx = np.flatnonzero((class_ids == c) & (scores >= conf_threshold))
        kept.extend(idx[i] for i in nms(boxes[idx], scores[idx], nms_iou))
    kept.sort(key=lambda i: (-scores[i], i))
    return [
        Detection(image_id, int(class_ids[i]), float(scores[i]), tuple(boxes[i]))
        for i in kept[:max_detections]
    ]


def batch_detections(
    preds: Sequence[AnchorPredictions], image_ids: Sequence, **kwargs
) -> List[Detection]:
    out: List[Detection] = []
    for pred, image_id in zip(preds, image_ids):
        out.extend(to_detections(pred, image_id, **kwargs))
    return out
