import numpy as np
import pytest

from ..common.exceptions import InvalidBoxError
from .matching import match_counts, match_detections
from .metrics import (
    COCO_THRESHOLDS,
    average_precision,
    detection_summary,
    envelope,
    mean_ap,
    pr_curve,
    precision_recall_f1,
)
from .types import Detection, GroundTruth


def det(score, box, class_id=0, image_id=0):
    return Detection(image_id, class_id, score, box)


def gt(box, class_id=0, image_id=0):
    return GroundTruth(image_id, class_id, box)


def hand_layout():
    gts = [gt([0, 0, 10, 10]), gt([20, 0, 30, 10])]
    dets = [det(0.9, [0, 0, 10, 10]), det(0.8, [1, 0, 11, 10]), det(0.7, [20, 0, 30, 10])]
    return dets, gts


def random_instance(seed):
    rng = np.random.default_rng(seed)
    n_gt = int(rng.integers(1, 5))
    n_det = int(rng.integers(0, 7))
    gts = []
    for _ in range(n_gt):
        x, y = rng.uniform(0, 20, size=2)
        w, h = rng.uniform(2, 8, size=2)
        gts.append(gt([x, y, x + w, y + h]))
    # few distinct levels so ties are common
    scores = rng.integers(1, 4, size=n_det) / 4
    dets = []
    for s in scores:
        if rng.uniform() < 0.7:
            base = np.array(gts[int(rng.integers(n_gt))].box)
            box = base + rng.normal(scale=1.0, size=4)
            box[2:] = np.maximum(box[2:], box[:2] + 0.5)
        else:
            x, y = rng.uniform(0, 20, size=2)
            box = np.array([x, y, x + 4, y + 4])
        dets.append(det(float(s), box))
    return dets, gts


def oracle_ap(dets, gts, iou_thresh=0.5):
    """Enumerate every score threshold and integrate the envelope exactly."""
    points = []
    for s in sorted({d.score for d in dets}, reverse=True):
        kept = [d for d in dets if d.score >= s]
        tp = int(match_detections(kept, gts, iou_thresh).sum())
        points.append((tp / len(gts), tp / len(kept)))
    levels = sorted({r for r, _ in points if r > 0})
    area, prev = 0.0, 0.0
    for level in levels:
        area += (level - prev) * max(p for r, p in points if r >= level)
        prev = level
    return area


def test_single_exact_detection_is_tp():
    assert match_detections([det(0.5, [0, 0, 4, 4])], [gt([0, 0, 4, 4])]).tolist() == [True]


def test_duplicate_detection_is_fp():
    flags = match_detections([det(0.4, [0, 0, 4, 4]), det(0.9, [0, 0, 4, 4])], [gt([0, 0, 4, 4])])
    assert flags.tolist() == [False, True]


def test_hand_layout_flags():
    dets, gts = hand_layout()
    assert match_detections(dets, gts).tolist() == [True, False, True]
    assert match_counts(dets, gts) == (2, 1, 0)


def test_score_ties_prefer_lower_index():
    dets = [det(0.5, [0, 0, 4, 4]), det(0.5, [0, 0, 4, 4])]
    assert match_detections(dets, [gt([0, 0, 4, 4])]).tolist() == [True, False]


@pytest.mark.parametrize("tp_first", [True, False])
def test_tied_scores_form_one_threshold(tp_first):
    pair = [det(0.5, [0, 0, 4, 4]), det(0.5, [20, 20, 24, 24])]
    dets = pair if tp_first else pair[::-1]
    gts = [gt([0, 0, 4, 4])]
    assert average_precision(dets, gts, 0) == pytest.approx(0.5)
    assert average_precision(dets, gts, 0, mode="coco101") == pytest.approx(0.5)
    curve = pr_curve(dets, gts, 0)
    assert [(p.recall, p.precision, p.score) for p in curve] == [(1.0, 0.5, 0.5)]


def test_tie_block_between_distinct_scores():
    gts = [gt([0, 0, 4, 4]), gt([10, 0, 14, 4])]
    dets = [
        det(0.9, [0, 0, 4, 4]),
        det(0.6, [30, 30, 34, 34]),
        det(0.6, [10, 0, 14, 4]),
        det(0.2, [40, 40, 44, 44]),
    ]
    curve = pr_curve(dets, gts, 0, interpolate=False)
    assert [p.score for p in curve] == [0.9, 0.6, 0.2]
    assert [p.recall for p in curve] == [0.5, 1.0, 1.0]
    assert [p.precision for p in curve] == pytest.approx([1.0, 2 / 3, 0.5])
    assert average_precision(dets, gts, 0) == pytest.approx(0.5 + 0.5 * 2 / 3)


def test_iou_must_exceed_threshold():
    # IoU exactly 0.5 does not match
    flags = match_detections([det(0.9, [0, 0, 2, 2])], [gt([0, 0, 2, 4])], iou_thresh=0.5)
    assert flags.tolist() == [False]


def test_matching_respects_image_and_class():
    dets = [det(0.9, [0, 0, 4, 4], class_id=1), det(0.8, [0, 0, 4, 4], image_id=1)]
    assert match_detections(dets, [gt([0, 0, 4, 4])]).tolist() == [False, False]


def test_bad_threshold():
    with pytest.raises(ValueError):
        match_detections([], [], iou_thresh=1.0)


def test_invalid_boxes_and_scores_rejected():
    with pytest.raises(InvalidBoxError):
        det(0.5, [4, 0, 0, 4])
    with pytest.raises(InvalidBoxError):
        det(float("nan"), [0, 0, 1, 1])


@pytest.mark.parametrize(
    "counts,expected",
    [
        ((2, 0, 0), (1.0, 1.0, 1.0)),
        ((0, 0, 5), (0.0, 0.0, 0.0)),
        ((2, 1, 1), (2 / 3, 2 / 3, 2 / 3)),
        ((0, 0, 0), (0.0, 0.0, 0.0)),
    ],
)
def test_precision_recall_f1(counts, expected):
    assert precision_recall_f1(*counts) == pytest.approx(expected)


def test_hand_layout_average_precision():
    dets, gts = hand_layout()
    curve = pr_curve(dets, gts, 0)
    assert [p.recall for p in curve] == [0.5, 0.5, 1.0]
    assert [p.precision for p in curve] == pytest.approx([1.0, 1.0, 2 / 3])
    assert [p.precision for p in pr_curve(dets, gts, 0, interpolate=False)] == pytest.approx(
        [1.0, 0.5, 2 / 3]
    )
    assert average_precision(dets, gts, 0) == pytest.approx(5 / 6)


def test_perfect_detections():
    gts = [gt([0, 0, 4, 4]), gt([10, 10, 12, 14])]
    dets = [det(0.9, g.box) for g in gts]
    assert average_precision(dets, gts, 0) == 1.0
    assert average_precision(dets, gts, 0, mode="coco101") == pytest.approx(1.0)


def test_no_ground_truth_gives_zero():
    assert average_precision([det(0.9, [0, 0, 1, 1])], [], 0) == 0.0
    assert average_precision([], [gt([0, 0, 1, 1])], 0) == 0.0


def test_coco101_hand_value():
    dets, gts = hand_layout()
    # recall samples 0..0.5 see precision 1, 0.51..1.0 see 2/3
    expected = (51 * 1.0 + 50 * 2 / 3) / 101
    assert average_precision(dets, gts, 0, mode="coco101") == pytest.approx(expected)


def test_unknown_mode():
    dets, gts = hand_layout()
    with pytest.raises(ValueError):
        average_precision(dets, gts, 0, mode="eleven")


@pytest.mark.parametrize("seed", range(200))
def test_allpoint_matches_threshold_oracle(seed):
    dets, gts = random_instance(seed)
    assert average_precision(dets, gts, 0) == pytest.approx(oracle_ap(dets, gts), abs=1e-9)


@pytest.mark.parametrize("seed", range(50))
def test_ap_bounded_and_non_increasing_in_threshold(seed):
    dets, gts = random_instance(seed)
    aps = [average_precision(dets, gts, 0, t) for t in COCO_THRESHOLDS]
    assert all(0.0 <= a <= 1.0 for a in aps)
    assert all(a >= b - 1e-12 for a, b in zip(aps, aps[1:]))


@pytest.mark.parametrize("seed", range(50))
def test_envelope_non_increasing(seed):
    dets, gts = random_instance(seed)
    precision = [p.precision for p in pr_curve(dets, gts, 0)]
    assert all(a >= b for a, b in zip(precision, precision[1:]))


def test_envelope_on_tied_recall():
    out = envelope(np.array([0.5, 0.5, 1.0]), np.array([1.0, 0.5, 2 / 3]))
    np.testing.assert_allclose(out, [1.0, 1.0, 2 / 3])


@pytest.mark.parametrize("seed", range(30))
def test_trailing_false_positive_never_raises_ap(seed):
    dets, gts = random_instance(seed)
    low = min((d.score for d in dets), default=1.0) / 2
    far = dets + [det(low, [100, 100, 101, 101])]
    assert average_precision(far, gts, 0) <= average_precision(dets, gts, 0) + 1e-12


def test_low_scored_tp_on_missed_gt_raises_ap():
    dets, gts = hand_layout()
    gts = gts + [gt([40, 0, 50, 10])]
    base = average_precision(dets, gts, 0)
    extra = dets + [det(0.1, [40, 0, 50, 10])]
    assert average_precision(extra, gts, 0) > base


def test_mean_ap_single_class_equals_ap():
    dets, gts = hand_layout()
    map50, _ = mean_ap(dets, gts, 1)
    assert map50 == pytest.approx(average_precision(dets, gts, 0))


def test_mean_ap_averages_classes():
    gts = [gt([0, 0, 4, 4]), gt([0, 0, 4, 4], class_id=1), gt([10, 10, 14, 14], class_id=1)]
    dets = [det(0.9, [0, 0, 4, 4]), det(0.8, [0, 0, 4, 4], class_id=1)]
    map50, _ = mean_ap(dets, gts, 2)
    assert map50 == pytest.approx(0.75)


@pytest.mark.parametrize("seed", range(50))
def test_strict_thresholds_never_raise_map(seed):
    dets, gts = random_instance(seed)
    map50, map50_95 = mean_ap(dets, gts, 1, map50_mode="coco101")
    assert map50_95 <= map50 + 1e-12


def test_detection_summary():
    dets, gts = hand_layout()
    dets = dets + [det(0.01, [50, 50, 60, 60])]
    summary = detection_summary(dets, gts, 1, conf_threshold=0.5)
    assert (summary.tp, summary.fp, summary.fn) == (2, 1, 0)
    assert summary.precision == pytest.approx(2 / 3)
    assert summary.recall == 1.0
    assert summary.map50 == pytest.approx(5 / 6)
    assert set(summary.as_dict()) >= {"precision", "recall", "f1", "map50", "map50_95"}
