import numpy as np

from ..common.config import EnhanceConfig
from .clahe import clahe_luminance, equalize_luminance, tile_grid
from .color import lab_to_srgb, srgb_to_lab


def low_contrast_ramp(h=64, w=64):
    lab = np.zeros((h, w, 3))
    lab[..., 0] = np.linspace(40.0, 60.0, w)[None, :].repeat(h, axis=0)
    lab[..., 1] = 3.0
    lab[..., 2] = -4.0
    return lab_to_srgb(lab)


def test_constant_image_stays_constant():
    img = np.full((32, 40, 3), [0.3, 0.5, 0.6], dtype=np.float32)
    out = clahe_luminance(img, EnhanceConfig())
    assert np.all(out == out[0, 0])


def test_ramp_contrast_increases():
    img = low_contrast_ramp()
    before = srgb_to_lab(img)[..., 0].std()
    after = srgb_to_lab(clahe_luminance(img, EnhanceConfig()))[..., 0].std()
    assert after > before


def test_chroma_passes_through():
    img = low_contrast_ramp()
    lab_in = srgb_to_lab(img)
    out = clahe_luminance(img, EnhanceConfig())
    lab_out = srgb_to_lab(out)
    in_gamut = np.all((out > 0.002) & (out < 0.998), axis=2)
    assert in_gamut.mean() > 0.5
    np.testing.assert_allclose(lab_out[in_gamut][:, 1:], lab_in[in_gamut][:, 1:], atol=0.05)


def test_equalize_leaves_other_planes_alone():
    lab = srgb_to_lab(low_contrast_ramp())
    before = lab.copy()
    lab[..., 0] = equalize_luminance(lab[..., 0], 2.0, (8, 8))
    np.testing.assert_array_equal(lab[..., 1:], before[..., 1:])


def test_tile_grid_shrinks_for_small_images():
    assert tile_grid((3, 20), (8, 8)) == (3, 8)
    assert tile_grid((64, 64), (8, 8)) == (8, 8)


def test_tiny_image_is_accepted():
    img = np.random.default_rng(0).random((3, 5, 3)).astype(np.float32)
    out = clahe_luminance(img, EnhanceConfig())
    assert out.shape == img.shape
    assert out.min() >= 0.0 and out.max() <= 1.0
