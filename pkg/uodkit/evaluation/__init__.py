from .matching import match_counts, match_detections
from .metrics import (
    COCO_THRESHOLDS,
    DetectionSummary,
    average_precision,
    detection_summary,
    envelope,
    mean_ap,
    pr_curve,
    precision_recall_f1,
)
from .types import Detection, GroundTruth, PRPoint

__all__ = [
    "COCO_THRESHOLDS",
    "Detection",
    "DetectionSummary",
    "GroundTruth",
    "PRPoint",
    "average_precision",
    "detection_summary",
    "envelope",
    "match_counts",
    "match_detections",
    "mean_ap",
    "pr_curve",
    "precision_recall_f1",
]
