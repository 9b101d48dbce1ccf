import math

import numpy as np
import pytest

from ..common.config import TrainConfig
from ..common.exceptions import TrainingDivergedError
from ..enhance import enhance_many
from ..evaluation import mean_ap
from ..fgiou import LossBreakdown
from .model import init_toynet
from .synth import synth_dataset
from .train import (
    SGD,
    batch_loss,
    clip_grad_norm,
    cosine_lr,
    ground_truths,
    predict,
    prepare_images,
    split_dataset,
    train_toy,
)

SMALL = dict(epochs=2, batch=4, workers=1)


@pytest.fixture(scope="module")
def data():
    return synth_dataset(10, seed=5)


def test_weight_decay_step_shrinks_by_exact_factor():
    p = {"w": np.array([3.0, -4.0]), "b": np.array([1.5])}
    before = {k: np.linalg.norm(v) for k, v in p.items()}
    opt = SGD(p, momentum=0.937, weight_decay=0.0005)
    opt.step({k: np.zeros_like(v) for k, v in p.items()}, lr=0.01)
    for k, v in p.items():
        assert np.linalg.norm(v) == pytest.approx(before[k] * (1 - 0.01 * 0.0005), rel=1e-12)


def test_momentum_accumulates():
    p = {"w": np.array([0.0])}
    opt = SGD(p, momentum=0.5, weight_decay=0.0)
    opt.step({"w": np.array([1.0])}, lr=1.0)
    opt.step({"w": np.array([1.0])}, lr=1.0)
    # velocities 1 then 1.5
    assert p["w"][0] == pytest.approx(-2.5)


def test_clip_grad_norm():
    grads = {"a": np.array([3.0]), "b": np.array([4.0])}
    assert clip_grad_norm(grads, 1.0) == pytest.approx(5.0)
    assert math.hypot(grads["a"][0], grads["b"][0]) == pytest.approx(1.0)
    small = {"a": np.array([0.1])}
    clip_grad_norm(small, 1.0)
    assert small["a"][0] == 0.1


def test_cosine_schedule_endpoints():
    cfg = TrainConfig(epochs=10, lr=0.01, final_lr_ratio=0.01)
    assert cosine_lr(cfg, 0) == pytest.approx(0.01)
    assert cosine_lr(cfg, 10) == pytest.approx(0.0001)
    lrs = [cosine_lr(cfg, e) for e in range(10)]
    assert all(a >= b for a, b in zip(lrs, lrs[1:]))
    assert cosine_lr(cfg.model_copy(update={"cosine_lr": False}), 7) == 0.01


def test_split_is_80_20_and_order_preserving(data):
    train, val = split_dataset(data, 0.2, seed=0)
    assert len(train) == 8 and len(val) == 2
    ids = [s.image_id for s in train + val]
    assert sorted(ids) == [s.image_id for s in data]
    assert [s.image_id for s in train] == sorted(s.image_id for s in train)
    again = split_dataset(data, 0.2, seed=0)
    assert [s.image_id for s in again[1]] == [s.image_id for s in val]


def test_split_needs_two_samples(data):
    with pytest.raises(ValueError):
        split_dataset(data[:1], 0.2, seed=0)


def test_prepare_images_layout_and_enhancement(data):
    plain = prepare_images(data[:2], TrainConfig())
    assert plain.shape == (2, 3, 64, 64)
    assert plain.dtype == np.float32
    np.testing.assert_array_equal(plain[0], data[0].image.transpose(2, 0, 1))

    enhanced = prepare_images(data[:2], TrainConfig(use_enhance=True))
    expected = enhance_many([s.image for s in data[:2]])
    np.testing.assert_array_equal(enhanced[1], expected[1].transpose(2, 0, 1))


def test_ground_truths(data):
    gts = ground_truths(data[:3])
    assert len(gts) == sum(len(s.objects) for s in data[:3])
    assert {g.image_id for g in gts} == {"00000", "00001", "00002"}


@pytest.mark.parametrize("use_fgiou", [True, False])
def test_batch_loss_grads_cover_every_parameter(data, use_fgiou):
    params = init_toynet(np.random.default_rng(0))
    cfg = TrainConfig(use_fgiou=use_fgiou)
    x = prepare_images(data[:2], cfg)
    part, grads = batch_loss(params, x, data[:2], cfg)
    assert set(grads) == set(params.named_parameters())
    assert part.total > 0
    assert all(np.all(np.isfinite(g)) for g in grads.values())


def test_same_seed_gives_identical_logs(data):
    cfg = TrainConfig(**SMALL, seed=3)
    a = train_toy(cfg, data)
    b = train_toy(cfg, data)
    assert [r.as_dict() for r in a.log] == [r.as_dict() for r in b.log]
    for name, value in a.params.named_parameters().items():
        np.testing.assert_array_equal(value, b.params.named_parameters()[name])


def test_zero_lr_is_the_identity(data):
    cfg = TrainConfig(**SMALL, lr=0.0, seed=1)
    result = train_toy(cfg, data)
    initial = init_toynet(np.random.default_rng(1), use_dpsa=True)
    for name, value in initial.named_parameters().items():
        np.testing.assert_array_equal(result.params.named_parameters()[name], value)
    first, second = result.log
    assert second.loss == pytest.approx(first.loss, rel=1e-9)
    assert second.val_map50 == first.val_map50


def test_log_records_each_epoch(data):
    seen = []
    result = train_toy(TrainConfig(**SMALL), data, on_epoch=seen.append)
    assert [r.epoch for r in result.log] == [1, 2]
    assert seen == result.log
    for r in result.log:
        assert 0.0 <= r.val_map50 <= 1.0
        assert 0.0 <= r.val_map50_95 <= 1.0
        assert r.loss == pytest.approx(r.giou * 7.5 + r.focal * 0.5 + r.obj_focal, rel=1e-9)
    assert len(result.val) == 2
    assert {d.image_id for d in result.val_predictions} <= {s.image_id for s in result.val}


def test_early_stopping_on_flat_map(data):
    cfg = TrainConfig(epochs=5, batch=4, lr=0.0, early_stopping=True, patience=1)
    assert len(train_toy(cfg, data).log) == 2


def test_divergence_reports_the_step(data, mocker):
    nan = float("nan")
    mocker.patch(
        "uodkit.toydet.train.batch_loss",
        return_value=(LossBreakdown(nan, nan, nan, nan, 0), {}),
    )
    with pytest.raises(TrainingDivergedError) as err:
        train_toy(TrainConfig(**SMALL), data)
    assert err.value.step == 0


def test_overfits_a_handful_of_images():
    samples = synth_dataset(8, seed=11)
    cfg = TrainConfig(epochs=40, batch=4)
    params = init_toynet(np.random.default_rng(0))
    opt = SGD(params.named_parameters(), cfg.momentum, cfg.weight_decay)
    x = prepare_images(samples, cfg)
    losses = []
    for epoch in range(cfg.epochs):
        for start in range(0, len(samples), cfg.batch):
            chunk = slice(start, start + cfg.batch)
            part, grads = batch_loss(params, x[chunk], samples[chunk], cfg)
            clip_grad_norm(grads, cfg.max_grad_norm)
            opt.step(grads, cosine_lr(cfg, epoch))
            losses.append(part.total)

    dets = predict(params, x, [s.image_id for s in samples], cfg)
    map50, _ = mean_ap(dets, ground_truths(samples), cfg.num_classes)
    assert map50 > 0
    assert np.mean(losses[-2:]) < 0.75 * np.mean(losses[:2])


@pytest.mark.slow
@pytest.mark.timeout(1800)
def test_full_arm_learns_the_synthetic_set():
    result = train_toy(TrainConfig(), synth_dataset(500, seed=0))
    assert len(result.log) == 30
    assert max(r.val_map50 for r in result.log) >= 0.60
    assert result.final.loss < 0.5 * result.log[0].loss
