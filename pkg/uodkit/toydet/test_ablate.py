import numpy as np
import pytest

from ..common.config import TrainConfig
from .ablate import (
    ARMS,
    AblationRow,
    StabilityReport,
    StabilityRow,
    ablate,
    format_stability,
    format_table,
    weight_stability,
)
from .model import init_toynet
from .synth import synth_dataset
from .train import EpochRecord, TrainResult

FAKE_MAP = {"baseline": 0.40, "+DPSA": 0.45, "+FGIoU": 0.50, "both": 0.55}


def fake_train(cfg, samples, enhance_cfg=None):
    map50 = FAKE_MAP[cfg.arm_name()] + 0.01 * (cfg.loss_weights.w_box - 7.5)
    record = EpochRecord(1, cfg.lr, 1.0, 0.1, 0.1, 0.1, 3.0, map50, map50 / 2)
    params = init_toynet(np.random.default_rng(cfg.seed), use_dpsa=cfg.use_dpsa)
    return TrainResult(params, [record], list(samples))


def test_ablation_rows(mocker):
    train = mocker.patch("uodkit.toydet.ablate.train_toy", side_effect=fake_train)
    rows = ablate(TrainConfig(seed=9), [])
    assert [r.arm for r in rows] == [arm for arm, _, _ in ARMS]
    assert rows[0].delta_map50 == 0.0 and rows[0].delta_map50_95 == 0.0
    assert rows[3].delta_map50 == pytest.approx(0.15)
    assert rows[1].num_params > rows[0].num_params
    assert {c.args[0].seed for c in train.call_args_list} == {9}


def test_table_layout():
    rows = [
        AblationRow("baseline", 0.5, 0.3, 0.0, 0.0, 1000),
        AblationRow("both", 0.6, 0.35, 0.1, 0.05, 1200),
    ]
    lines = format_table(rows).splitlines()
    assert lines[0].startswith("| Model | mAP50 | mAP50:95")
    assert lines[2] == "| baseline | 50.0 | 30.0 | +0.0 | +0.0 | 1,000 |"
    assert lines[3] == "| both | 60.0 | 35.0 | +10.0 | +5.0 | 1,200 |"


def test_weight_stability_perturbs_each_weight(mocker):
    train = mocker.patch("uodkit.toydet.ablate.train_toy", side_effect=fake_train)
    report = weight_stability(TrainConfig(use_dpsa=False), [])
    assert report.reference_map50 == pytest.approx(0.55)
    assert [(r.weight, r.factor) for r in report.rows] == [
        (w, f) for w in ("w_box", "w_cls", "w_obj") for f in (0.8, 1.2)
    ]
    assert all(c.args[0].use_dpsa and c.args[0].use_fgiou for c in train.call_args_list)
    box_down = report.rows[0]
    assert box_down.delta_map50 == pytest.approx(0.01 * (7.5 * 0.8 - 7.5))
    assert report.spread == pytest.approx(0.01 * 7.5 * 0.4)


def test_stability_table():
    report = StabilityReport(0.6, [StabilityRow("w_cls", 1.2, 0.58, -0.02)])
    text = format_stability(report)
    assert "| w_cls | 1.20 | 58.0 | -2.0 |" in text
    assert "Spread: 2.0 points" in text
    assert report.max_abs_delta == pytest.approx(0.02)


@pytest.mark.slow
@pytest.mark.timeout(7200)
def test_ablation_and_stability_on_the_synthetic_set():
    data = synth_dataset(500, seed=0)
    rows = ablate(TrainConfig(), data)
    assert len(rows) == 4
    assert all(0.0 <= r.map50 <= 1.0 for r in rows)
    report = weight_stability(TrainConfig(), data)
    assert report.max_abs_delta < 0.10
