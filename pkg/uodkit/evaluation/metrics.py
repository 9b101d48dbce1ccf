"""Precision, recall, F1, PR curves and (mean) average precision."""

from dataclasses import asdict, dataclass
from typing import List, Literal, Sequence, Tuple

import numpy as np
from loguru import logger

from .matching import match_counts, match_detections, score_order
from .types import Detection, GroundTruth, PRPoint

APMode = Literal["allpoint", "coco101"]

COCO_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
RECALL_SAMPLES = np.linspace(0.0, 1.0, 101)


def precision_recall_f1(tp: int, fp: int, fn: int) -> Tuple[float, float, float]:
    """P, R and F1, each 0 when its denominator is 0."""
    if min(tp, fp, fn) < 0:
        raise ValueError(f"counts must be >= 0, got tp={tp} fp={fp} fn={fn}")
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def _class_curve(dets, gts, class_id: int, iou_thresh: float):
    """Ranked scores, cumulative recall and raw precision for one class.

    Detections with equal scores form one threshold: each tie block yields a
    single point, taken after its last member.
    """
    dets = [d for d in dets if d.class_id == class_id]
    gts = [g for g in gts if g.class_id == class_id]
    flags = match_detections(dets, gts, iou_thresh)
    order = score_order(dets)
    scores = np.array([dets[i].score for i in order], dtype=np.float64)
    cum_tp = np.cumsum(flags[order])
    recall = cum_tp / len(gts) if gts else np.zeros(len(order))
    precision = cum_tp / np.arange(1, len(order) + 1)
    last = np.append(scores[1:] != scores[:-1], True)[: len(scores)]
    return scores[last], recall[last], precision[last], len(gts)


def envelope(recall: np.ndarray, precision: np.ndarray) -> np.ndarray:
    """Max precision over every point whose recall is at least this point's.

    ``recall`` must be non-decreasing, as it is along a ranked detection list.
    """
    if len(precision) == 0:
        return precision
    suffix = np.maximum.accumulate(precision[::-1])[::-1]
    first_of_level = np.searchsorted(recall, recall, side="left")
    return suffix[first_of_level]


def pr_curve(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruth],
    class_id: int,
    iou_thresh: float = 0.5,
    interpolate: bool = True,
) -> List[PRPoint]:
    """One point per distinct score of ``class_id`` detections, by descending score."""
    scores, recall, precision, _ = _class_curve(dets, gts, class_id, iou_thresh)
    if interpolate:
        precision = envelope(recall, precision)
    return [PRPoint(float(r), float(p), float(s)) for r, p, s in zip(recall, precision, scores)]


def area_under_envelope(recall: np.ndarray, env: np.ndarray, mode: APMode = "allpoint") -> float:
    if len(recall) == 0:
        return 0.0
    if mode == "allpoint":
        steps = np.diff(np.concatenate([[0.0], recall]))
        return float(np.sum(steps * env))
    if mode == "coco101":
        idx = np.searchsorted(recall, RECALL_SAMPLES, side="left")
        sampled = np.where(idx < len(recall), env[np.minimum(idx, len(env) - 1)], 0.0)
        return float(sampled.mean())
    raise ValueError(f"unknown AP mode '{mode}'")


def average_precision(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruth],
    class_id: int,
    iou_thresh: float = 0.5,
    mode: APMode = "allpoint",
) -> float:
    """Area under the precision envelope; 0 for a class with no ground truth."""
    _, recall, precision, num_gt = _class_curve(dets, gts, class_id, iou_thresh)
    if num_gt == 0:
        return 0.0
    return area_under_envelope(recall, envelope(recall, precision), mode)


def mean_ap(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruth],
    num_classes: int,
    thresholds: Sequence[float] = COCO_THRESHOLDS,
    map50_mode: APMode = "allpoint",
) -> Tuple[float, float]:
    """(mAP50, mAP50:95) averaged over all ``num_classes`` classes.

    mAP50 integrates with ``map50_mode``; the threshold sweep always uses the
    101-point rule.
    """
    if num_classes < 1:
        raise ValueError(f"num_classes must be >= 1, got {num_classes}")
    classes = range(num_classes)
    map50 = float(np.mean([average_precision(dets, gts, c, 0.5, map50_mode) for c in classes]))
    sweep = [
        [average_precision(dets, gts, c, t, "coco101") for t in thresholds] for c in classes
    ]
    map50_95 = float(np.mean(sweep))
    logger.debug(f"mAP50={map50:.4f} mAP50:95={map50_95:.4f} over {num_classes} classes")
    return map50, map50_95


@dataclass(frozen=True)
class DetectionSummary:
    precision: float
    recall: float
    f1: float
    map50: float
    map50_95: float
    tp: int
    fp: int
    fn: int

    def as_dict(self) -> dict:
        return asdict(self)


def detection_summary(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruth],
    num_classes: int,
    conf_threshold: float = 0.25,
    iou_thresh: float = 0.5,
    map50_mode: APMode = "allpoint",
) -> DetectionSummary:
    """P/R/F1 of the detections above ``conf_threshold`` plus mAP over all of them."""
    kept = [d for d in dets if d.score >= conf_threshold]
    tp, fp, fn = match_counts(kept, gts, iou_thresh)
    p, r, f1 = precision_recall_f1(tp, fp, fn)
    map50, map50_95 = mean_ap(dets, gts, num_classes, map50_mode=map50_mode)
    return DetectionSummary(p, r, f1, map50, map50_95, tp, fp, fn)
