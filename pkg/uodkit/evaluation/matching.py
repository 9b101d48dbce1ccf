"""Greedy score-ordered matching of detections to ground truth."""

from collections import defaultdict
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..fgiou.boxes import box_iou_matrix
from .types import Detection, GroundTruth

Key = Tuple[int, int]


def score_order(dets: Sequence[Detection]) -> List[int]:
    """Indices by descending score; equal scores keep their input order."""
    return sorted(range(len(dets)), key=lambda i: -dets[i].score)


def group_by_image_class(items) -> Dict[Key, List[int]]:
    groups: Dict[Key, List[int]] = defaultdict(list)
    for i, item in enumerate(items):
        groups[(item.image_id, item.class_id)].append(i)
    return groups


def match_detections(
    dets: Sequence[Detection], gts: Sequence[GroundTruth], iou_thresh: float = 0.5
) -> np.ndarray:
    """True-positive flag for every detection, in input order.

    Within each (image, class) group detections are visited by descending
    score and claim the unclaimed gt of highest IoU, provided that IoU is
    strictly above ``iou_thresh``. Everything else is a false positive.
    """
    if not 0.0 < iou_thresh < 1.0:
        raise ValueError(f"iou_thresh must lie in (0, 1), got {iou_thresh}")
    tp = np.zeros(len(dets), dtype=bool)
    gt_groups = group_by_image_class(gts)
    for key, det_idx in group_by_image_class(dets).items():
        gt_idx = gt_groups.get(key)
        if not gt_idx:
            continue
        order = sorted(det_idx, key=lambda i: -dets[i].score)
        ious = box_iou_matrix(
            np.array([dets[i].box for i in order]), np.array([gts[j].box for j in gt_idx])
        )
        claimed = np.zeros(len(gt_idx), dtype=bool)
        for row, i in enumerate(order):
            candidates = np.where(claimed, -1.0, ious[row])
            best = int(np.argmax(candidates))
            if candidates[best] > iou_thresh:
                claimed[best] = True
                tp[i] = True
    return tp


def match_counts(
    dets: Sequence[Detection], gts: Sequence[GroundTruth], iou_thresh: float = 0.5
) -> Tuple[int, int, int]:
    """(TP, FP, FN) over the whole set."""
    flags = match_detections(dets, gts, iou_thresh)
    tp = int(flags.sum())
    return tp, len(dets) - tp, len(gts) - tp
