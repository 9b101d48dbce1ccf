import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ..common.exceptions import ShapeMismatchError
from .ops import (
    adaptive_pool,
    broadcast_mul,
    channel_concat,
    channel_pool,
    channel_split,
    conv2d,
    maxpool2d,
    sigmoid,
    silu,
)
from .tensor import ConvParams


def conv_oracle(x, weight, bias, stride, padding):
    """Direct nested-loop cross-correlation."""
    n, c, h, w = x.shape
    o, _, kh, kw = weight.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (w + 2 * padding - kw) // stride + 1
    out = np.zeros((n, o, oh, ow))
    for b in range(n):
        for oc in range(o):
            for i in range(oh):
                for j in range(ow):
                    acc = 0.0
                    for ic in range(c):
                        for u in range(kh):
                            for v in range(kw):
                                acc += (
                                    xp[b, ic, i * stride + u, j * stride + v]
                                    * weight[oc, ic, u, v]
                                )
                    out[b, oc, i, j] = acc + (0.0 if bias is None else bias[oc])
    return out


def maxpool_oracle(x, k):
    n, c, h, w = x.shape
    r = k // 2
    out = np.empty_like(x)
    for b in range(n):
        for ch in range(c):
            for i in range(h):
                for j in range(w):
                    out[b, ch, i, j] = x[
                        b, ch, max(0, i - r) : i + r + 1, max(0, j - r) : j + r + 1
                    ].max()
    return out


def test_conv_identity_1x1():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(2, 4, 5, 6)).astype(np.float32)
    p = ConvParams(weight=np.eye(4, dtype=np.float32).reshape(4, 4, 1, 1))
    np.testing.assert_array_equal(conv2d(x, p), x)


def test_conv_all_ones():
    x = np.ones((1, 1, 3, 3), dtype=np.float32)
    p = ConvParams(weight=np.ones((1, 1, 3, 3), dtype=np.float32))
    y = conv2d(x, p)
    assert y.shape == (1, 1, 1, 1)
    assert y[0, 0, 0, 0] == 9.0


def test_conv_matches_oracle():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(1, 2, 5, 5))
    weight = rng.normal(size=(3, 2, 3, 3))
    bias = rng.normal(size=3)
    y = conv2d(x, ConvParams(weight=weight, bias=bias, padding=1))
    np.testing.assert_allclose(y, conv_oracle(x, weight, bias, 1, 1), atol=1e-6)


def test_conv_strided_matches_oracle():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(2, 3, 8, 8))
    weight = rng.normal(size=(4, 3, 3, 3))
    y = conv2d(x, ConvParams(weight=weight, stride=2, padding=1))
    assert y.shape == (2, 4, 4, 4)
    np.testing.assert_allclose(y, conv_oracle(x, weight, None, 2, 1), atol=1e-6)


def test_conv_rejects_channel_mismatch():
    p = ConvParams(weight=np.zeros((1, 3, 1, 1)))
    with pytest.raises(ShapeMismatchError) as exc:
        conv2d(np.zeros((1, 2, 4, 4)), p)
    assert exc.value.axis == "channel"


def test_conv_rejects_misaligned_stride():
    # (6 + 0 - 3) = 3 is odd and there is no padding to absorb the remainder
    p = ConvParams(weight=np.zeros((1, 1, 3, 3)), stride=2)
    with pytest.raises(ShapeMismatchError) as exc:
        conv2d(np.zeros((1, 1, 6, 5)), p)
    assert exc.value.axis == "height"


def test_conv_params_reject_even_kernel():
    with pytest.raises(ShapeMismatchError):
        ConvParams(weight=np.zeros((1, 1, 2, 2)))


@pytest.mark.parametrize("field, kwargs", [("stride", {"stride": 0}), ("padding", {"padding": -1})])
def test_conv_params_reject_bad_geometry(field, kwargs):
    with pytest.raises(ShapeMismatchError) as exc:
        ConvParams(weight=np.zeros((1, 1, 3, 3)), **kwargs)
    assert exc.value.axis == field
    assert exc.value.op == "ConvParams"


def test_conv_is_linear():
    rng = np.random.default_rng(3)
    p = ConvParams(weight=rng.normal(size=(2, 3, 3, 3)), padding=1)
    x = rng.normal(size=(1, 3, 6, 6))
    z = rng.normal(size=(1, 3, 6, 6))
    a, b = 1.7, -0.4
    np.testing.assert_allclose(
        conv2d(a * x + b * z, p), a * conv2d(x, p) + b * conv2d(z, p), atol=1e-5
    )


@pytest.mark.parametrize("k", [1, 3, 5])
def test_maxpool_constant_image(k):
    x = np.full((1, 2, 7, 7), -3.25, dtype=np.float32)
    np.testing.assert_array_equal(maxpool2d(x, k), x)


def test_maxpool_impulse():
    x = np.zeros((1, 1, 9, 9))
    x[0, 0, 1, 4] = 1.0
    y = maxpool2d(x, 5)
    expected = np.zeros_like(x)
    expected[0, 0, 0:4, 2:7] = 1.0
    np.testing.assert_array_equal(y, expected)


def test_maxpool_k13_matches_oracle():
    x = np.random.default_rng(4).normal(size=(1, 3, 16, 16))
    np.testing.assert_array_equal(maxpool2d(x, 13, 1, 6), maxpool_oracle(x, 13))


@pytest.mark.parametrize("seed", range(50))
def test_maxpool_matches_oracle_random(seed):
    rng = np.random.default_rng(seed)
    k = [5, 9, 13][seed % 3]
    x = rng.normal(size=(1, 2, int(rng.integers(1, 20)), int(rng.integers(1, 20))))
    np.testing.assert_array_equal(maxpool2d(x, k), maxpool_oracle(x, k))


def test_maxpool_negative_values_ignore_padding():
    x = np.full((1, 1, 3, 3), -5.0)
    x[0, 0, 0, 0] = -1.0
    assert maxpool2d(x, 3)[0, 0, 0, 0] == -1.0
    assert maxpool2d(x, 3)[0, 0, 2, 2] == -5.0


def test_maxpool_rejects_even_kernel():
    with pytest.raises(ShapeMismatchError):
        maxpool2d(np.zeros((1, 1, 4, 4)), 4)


@settings(max_examples=40, deadline=None)
@given(
    k=st.sampled_from([5, 9, 13]),
    h=st.integers(1, 64),
    w=st.integers(1, 64),
)
def test_maxpool_preserves_shape(k, h, w):
    assert maxpool2d(np.zeros((1, 1, h, w), dtype=np.float32), k).shape == (1, 1, h, w)


def test_adaptive_pool_constant():
    x = np.full((2, 3, 4, 5), 0.7, dtype=np.float32)
    np.testing.assert_allclose(adaptive_pool(x, "avg"), np.full((2, 3, 1, 1), 0.7), rtol=1e-6)
    np.testing.assert_array_equal(adaptive_pool(x, "max"), np.full((2, 3, 1, 1), 0.7, np.float32))


def test_adaptive_pool_definition():
    x = np.array([1.0, 2.0, 3.0, 4.0]).reshape(1, 1, 2, 2)
    assert adaptive_pool(x, "avg")[0, 0, 0, 0] == 2.5
    assert adaptive_pool(x, "max")[0, 0, 0, 0] == 4.0


def test_adaptive_pool_avg_matches_summation():
    x = np.random.default_rng(5).normal(size=(2, 3, 7, 9))
    expected = x.sum(axis=(2, 3)) / 63
    np.testing.assert_allclose(adaptive_pool(x, "avg")[..., 0, 0], expected, atol=1e-6)


def test_channel_pool():
    x = np.array([1.0, 5.0, 3.0]).reshape(1, 3, 1, 1)
    assert channel_pool(x, "mean")[0, 0, 0, 0] == 3.0
    assert channel_pool(x, "max")[0, 0, 0, 0] == 5.0


def test_sigmoid_values():
    assert sigmoid(np.array(0.0)) == 0.5
    assert silu(np.array(0.0)) == 0.0
    big = sigmoid(np.array([40.0, -1000.0, 1000.0]))
    assert big[0] >= 1 - 1e-9
    assert np.all(np.isfinite(big))


def test_sigmoid_symmetry():
    x = np.random.default_rng(6).normal(scale=4, size=200)
    np.testing.assert_allclose(sigmoid(-x), 1 - sigmoid(x), atol=1e-6)


def test_channel_concat_order_and_roundtrip():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(2, 2, 3, 3))
    b = rng.normal(size=(2, 3, 3, 3))
    y = channel_concat([a, b])
    assert y.shape == (2, 5, 3, 3)
    np.testing.assert_array_equal(y[:, :2], a)
    back = channel_split(y, [2, 3])
    np.testing.assert_array_equal(back[0], a)
    np.testing.assert_array_equal(back[1], b)
    np.testing.assert_array_equal(channel_concat([a]), a)


def test_channel_concat_rejects_spatial_mismatch():
    with pytest.raises(ShapeMismatchError) as exc:
        channel_concat([np.zeros((1, 1, 3, 3)), np.zeros((1, 1, 3, 4))])
    assert exc.value.axis == "width"


def test_broadcast_mul():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(2, 3, 4, 5))
    np.testing.assert_array_equal(broadcast_mul(x, np.ones((2, 3, 1, 1))), x)
    np.testing.assert_array_equal(broadcast_mul(x, np.full((2, 1, 4, 5), 0.5)), x * 0.5)

    w = rng.normal(size=(2, 3, 1, 1))
    expanded = np.repeat(np.repeat(w, 4, axis=2), 5, axis=3)
    np.testing.assert_allclose(broadcast_mul(x, w), x * expanded)

    with pytest.raises(ShapeMismatchError):
        broadcast_mul(x, np.ones((2, 3, 4, 1)))
