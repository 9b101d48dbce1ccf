import numpy as np

from ..enhance import enhance_pipeline
from .degrade import degrade_underwater
from .synth import synth_dataset, synth_sample


def rg_ratio(img):
    return float(img[..., 0].mean() / img[..., 1].mean())


def test_cyan_cast_is_induced():
    for s in synth_dataset(10, seed=4):
        assert rg_ratio(degrade_underwater(s.image, s.seed)) < rg_ratio(s.image)


def test_same_seed_is_bit_identical():
    img = synth_sample(3).image
    np.testing.assert_array_equal(degrade_underwater(img, 5), degrade_underwater(img, 5))


def test_seed_only_moves_sensor_noise():
    img = synth_sample(3).image
    diff = np.abs(degrade_underwater(img, 1) - degrade_underwater(img, 2))
    assert 0.0 < diff.max() < 0.05


def test_output_is_a_valid_image():
    out = degrade_underwater(synth_sample(8).image, 0)
    assert out.dtype == np.float32
    assert out.shape == (64, 64, 3)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_contrast_is_flattened():
    img = synth_sample(12).image
    assert degrade_underwater(img, 0).std() < img.std()


def test_enhancement_moves_ratio_back_toward_clean():
    closer = 0
    for s in synth_dataset(100, seed=2024):
        clean = rg_ratio(s.image)
        degraded = degrade_underwater(s.image, s.seed)
        restored = enhance_pipeline(degraded)
        if abs(rg_ratio(restored) - clean) < abs(rg_ratio(degraded) - clean):
            closer += 1
    assert closer >= 95
