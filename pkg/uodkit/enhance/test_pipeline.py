import numpy as np
import pytest

from ..common.config import EnhanceConfig
from .clahe import clahe_luminance
from .color import color_correct
from .dehaze import soft_guided_dehaze
from .pipeline import STAGES, enhance_many, enhance_pipeline, enhance_stages
from .refine import edge_refine


@pytest.fixture
def scene():
    rng = np.random.default_rng(0)
    yy, xx = np.mgrid[0:48, 0:48] / 47.0
    img = np.stack([0.3 + 0.4 * xx, 0.6 - 0.2 * yy, 0.5 + 0.2 * xx * yy], axis=-1)
    img += 0.05 * rng.standard_normal(img.shape)
    return np.clip(img, 0, 1).astype(np.float32)


def rg_ratio(img):
    return float(img[..., 0].mean() / img[..., 1].mean())


def test_stage_order():
    assert [name for name, _ in STAGES] == ["color_correct", "clahe", "dehaze", "edge_refine"]


def test_deterministic(scene):
    runs = [enhance_pipeline(scene) for _ in range(3)]
    for run in runs[1:]:
        np.testing.assert_array_equal(run, runs[0])


def test_thread_count_does_not_change_results(scene):
    batch = [scene, scene[::-1].copy(), scene[:, ::-1].copy(), scene * 0.5]
    serial = enhance_many(batch, workers=1)
    parallel = enhance_many(batch, workers=3)
    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a, b)


def test_stages_match_individual_calls(scene):
    cfg = EnhanceConfig()
    stages = enhance_stages(scene, cfg)
    step1 = color_correct(scene, cfg)
    step2 = clahe_luminance(step1, cfg)
    step3 = soft_guided_dehaze(step2, cfg)
    step4 = edge_refine(step3, cfg)
    np.testing.assert_array_equal(stages["color_correct"], step1)
    np.testing.assert_array_equal(stages["clahe"], step2)
    np.testing.assert_array_equal(stages["dehaze"], step3)
    np.testing.assert_array_equal(stages["edge_refine"], step4)
    np.testing.assert_array_equal(enhance_pipeline(scene, cfg), step4)


def test_cyan_cast_is_reduced(scene):
    cast = scene.copy()
    cast[..., 0] *= 0.4
    out = enhance_pipeline(cast)
    assert abs(rg_ratio(out) - 1.0) < abs(rg_ratio(cast) - 1.0)


def test_every_stage_stays_in_unit_range(scene):
    for name, img in enhance_stages(scene).items():
        assert img.dtype == np.float32, name
        assert img.min() >= 0.0 and img.max() <= 1.0, name
