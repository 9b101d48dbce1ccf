import numpy as np

from ..common.config import EnhanceConfig
from .dehaze import airlight, soft_guided_dehaze, transmission, veil


def test_zero_min_channel_is_identity():
    img = np.random.default_rng(0).random((20, 30, 3)).astype(np.float32)
    img[..., 2] = 0.0
    np.testing.assert_array_equal(soft_guided_dehaze(img, EnhanceConfig()), img)


def test_uniform_fog_is_fixed_point():
    img = np.full((32, 32, 3), 0.8, dtype=np.float32)
    np.testing.assert_array_equal(soft_guided_dehaze(img, EnhanceConfig()), img)


def test_two_pixel_hand_case():
    img = np.array([[[0.2, 0.5, 0.6], [0.6, 0.7, 0.8]]], dtype=np.float32)
    cfg = EnhanceConfig()

    # sigma = 2/30 is so small the veil is the min channel itself.
    v = veil(img, cfg)
    np.testing.assert_allclose(v, [[0.2, 0.6]], atol=1e-7)
    np.testing.assert_allclose(airlight(img, v), [0.6, 0.7, 0.8], atol=1e-7)
    np.testing.assert_allclose(transmission(v, cfg), [[0.85, 0.55]], atol=1e-7)

    out = soft_guided_dehaze(img, cfg)
    expected_first = [
        (0.2 - 0.6) / 0.85 + 0.6,
        (0.5 - 0.7) / 0.85 + 0.7,
        (0.6 - 0.8) / 0.85 + 0.8,
    ]
    np.testing.assert_allclose(out[0, 0], expected_first, atol=1e-6)
    np.testing.assert_allclose(out[0, 1], [0.6, 0.7, 0.8], atol=1e-6)


def test_transmission_floor():
    cfg = EnhanceConfig(dehaze_omega=1.0, dehaze_t_floor=0.25)
    t = transmission(np.array([[0.0, 0.5, 0.9, 1.0]]), cfg)
    np.testing.assert_allclose(t, [[1.0, 0.5, 0.25, 0.25]])


def test_airlight_uses_top_fraction():
    img = np.zeros((100, 20, 3), dtype=np.float32)
    img[0, :2] = [0.9, 0.8, 0.7]
    v = np.zeros((100, 20))
    v[0, :2] = 1.0
    # 2000 pixels -> the top 2 by veil.
    np.testing.assert_allclose(airlight(img, v), [0.9, 0.8, 0.7], atol=1e-7)


def test_output_range():
    img = np.random.default_rng(1).random((24, 24, 3)).astype(np.float32)
    out = soft_guided_dehaze(img, EnhanceConfig())
    assert out.dtype == np.float32
    assert out.min() >= 0.0 and out.max() <= 1.0

