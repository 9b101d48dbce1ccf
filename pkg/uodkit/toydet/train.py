"""Deterministic SGD training of the toy detector."""

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..common.config import EnhanceConfig, TrainConfig
from ..common.exceptions import TrainingDivergedError
from ..common.tracing import get_tracer
from ..enhance import enhance_many
from ..evaluation import Detection, GroundTruth, mean_ap
from ..fgiou import LossBreakdown, baseline_loss_and_grad, fgiou_loss_and_grad
from ..numcore import ParamDict, Tensor, as_tensor
from .model import (
    ToyNetParams,
    backward,
    decode,
    decode_backward,
    forward_detect,
    forward_with_cache,
    init_toynet,
)
from .postprocess import batch_detections
from .synth import SynthSample

tracer = get_tracer(__name__)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lr: float
    loss: float
    giou: float
    focal: float
    obj_focal: float
    num_pos: float
    val_map50: float
    val_map50_95: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    params: ToyNetParams
    log: List[EpochRecord]
    val: List[SynthSample]
    val_predictions: List[Detection] = field(default_factory=list)

    @property
    def final(self) -> EpochRecord:
        return self.log[-1]


class SGD:
    """SGD with heavy-ball momentum and L2 weight decay folded into the gradient."""

    def __init__(self, params: ParamDict, momentum: float, weight_decay: float):
        self.params = params
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.velocity = {name: np.zeros_like(p) for name, p in params.items()}

    def step(self, grads: ParamDict, lr: float) -> None:
        for name, p in self.params.items():
            v = self.velocity[name]
            v *= self.momentum
            v += grads[name] + self.weight_decay * p
            p -= lr * v


def clip_grad_norm(grads: ParamDict, max_norm: float) -> float:
    """Scale ``grads`` in place so their global L2 norm is at most ``max_norm``."""
    total = math.sqrt(sum(float(np.sum(np.square(g, dtype=np.float64))) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def cosine_lr(cfg: TrainConfig, epoch: int) -> float:
    if not cfg.cosine_lr:
        return cfg.lr
    final = cfg.lr * cfg.final_lr_ratio
    return final + (cfg.lr - final) * 0.5 * (1.0 + math.cos(math.pi * epoch / cfg.epochs))


def split_dataset(
    samples: Sequence[SynthSample], val_fraction: float, seed: int
) -> Tuple[List[SynthSample], List[SynthSample]]:
    """Seeded train/val split; both halves keep the input order."""
    if len(samples) < 2:
        raise ValueError(f"need at least 2 samples to split, got {len(samples)}")
    order = np.random.default_rng(seed).permutation(len(samples))
    n_val = min(len(samples) - 1, max(1, int(round(len(samples) * val_fraction))))
    val_idx = set(order[:n_val].tolist())
    train = [s for i, s in enumerate(samples) if i not in val_idx]
    val = [s for i, s in enumerate(samples) if i in val_idx]
    return train, val


def prepare_images(
    samples: Sequence[SynthSample], cfg: TrainConfig, enhance_cfg: Optional[EnhanceConfig] = None
) -> Tensor:
    """``(N, 3, H, W)`` float32 batch, enhanced first when ``cfg.use_enhance``."""
    images = [s.image for s in samples]
    if cfg.use_enhance:
        images = enhance_many(images, enhance_cfg, workers=cfg.workers)
    return as_tensor(np.stack(images).transpose(0, 3, 1, 2))


def ground_truths(samples: Sequence[SynthSample]) -> List[GroundTruth]:
    return [
        GroundTruth(s.image_id, class_id, tuple(box))
        for s in samples
        for class_id, box in s.objects
    ]


def mean_breakdown(parts: Sequence[LossBreakdown], weights: Sequence[float]) -> LossBreakdown:
    w = np.asarray(weights, dtype=np.float64) / float(np.sum(weights))
    fields = ("giou", "focal", "obj_focal", "total", "num_pos")
    means = {f: float(np.dot(w, [getattr(p, f) for p in parts])) for f in fields}
    return LossBreakdown(**means)


def batch_loss(
    params: ToyNetParams, x: Tensor, samples: Sequence[SynthSample], cfg: TrainConfig
) -> Tuple[LossBreakdown, ParamDict]:
    """Mean per-image loss over the batch and its parameter gradients."""
    cache = forward_with_cache(params, x)
    preds = decode(cache.out)
    n = len(samples)
    parts, pred_grads = [], []
    for pred, s in zip(preds, samples):
        if cfg.use_fgiou:
            part, g = fgiou_loss_and_grad(pred, s.boxes, s.classes, cfg.focal, cfg.loss_weights)
        else:
            part, g = baseline_loss_and_grad(pred, s.boxes, s.classes, cfg.loss_weights)
        for arr in (g.boxes, g.cls_logits, g.obj_logits):
            arr /= n
        parts.append(part)
        pred_grads.append(g)
    _, grads = backward(decode_backward(pred_grads, cache.out), cache, params)
    return mean_breakdown(parts, [1.0] * n), grads


def predict(
    params: ToyNetParams, x: Tensor, image_ids: Sequence, cfg: TrainConfig
) -> List[Detection]:
    dets: List[Detection] = []
    for start in range(0, len(x), cfg.batch):
        chunk = slice(start, start + cfg.batch)
        dets.extend(
            batch_detections(
                decode(forward_detect(params, x[chunk])),
                image_ids[chunk],
                conf_threshold=cfg.conf_threshold,
                nms_iou=cfg.nms_iou,
                max_detections=cfg.max_detections,
            )
        )
    return dets


def train_toy(
    cfg: TrainConfig,
    samples: Sequence[SynthSample],
    enhance_cfg: Optional[EnhanceConfig] = None,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> TrainResult:
    """Train one ablation arm; every logged number is fixed by ``cfg.seed`` and the data."""
    rng = np.random.default_rng(cfg.seed)
    train, val = split_dataset(samples, cfg.val_fraction, cfg.seed)
    params = init_toynet(rng, use_dpsa=cfg.use_dpsa, num_classes=cfg.num_classes)
    x_train = prepare_images(train, cfg, enhance_cfg)
    x_val = prepare_images(val, cfg, enhance_cfg)
    val_ids = [s.image_id for s in val]
    val_gts = ground_truths(val)
    opt = SGD(params.named_parameters(), cfg.momentum, cfg.weight_decay)

    logger.info(
        f"training arm '{cfg.arm_name()}' on {len(train)} images "
        f"({len(val)} held out) for {cfg.epochs} epochs"
    )
    log: List[EpochRecord] = []
    dets: List[Detection] = []
    step = 0
    best, stale = -1.0, 0
    for epoch in range(cfg.epochs):
        with tracer.start_as_current_span("train_epoch") as span:
            span.set_attribute("epoch", epoch)
            started = time.perf_counter()
            lr = cosine_lr(cfg, epoch)
            order = rng.permutation(len(train))
            parts, sizes = [], []
            for start in range(0, len(train), cfg.batch):
                idx = order[start : start + cfg.batch]
                part, grads = batch_loss(params, x_train[idx], [train[i] for i in idx], cfg)
                if not math.isfinite(part.total):
                    raise TrainingDivergedError(step, part.total)
                if cfg.max_grad_norm is not None:
                    clip_grad_norm(grads, cfg.max_grad_norm)
                opt.step(grads, lr)
                parts.append(part)
                sizes.append(len(idx))
                step += 1

            dets = predict(params, x_val, val_ids, cfg)
            map50, map50_95 = mean_ap(dets, val_gts, cfg.num_classes)
            mean = mean_breakdown(parts, sizes)
            record = EpochRecord(
                epoch=epoch + 1,
                lr=lr,
                loss=mean.total,
                giou=mean.giou,
                focal=mean.focal,
                obj_focal=mean.obj_focal,
                num_pos=mean.num_pos,
                val_map50=map50,
                val_map50_95=map50_95,
            )
            log.append(record)
            span.set_attribute("loss", record.loss)
            span.set_attribute("val_map50", map50)
            logger.info(
                f"epoch {record.epoch}/{cfg.epochs}: loss={record.loss:.4f} "
                f"mAP50={map50:.4f} mAP50:95={map50_95:.4f} "
                f"({time.perf_counter() - started:.1f}s)"
            )
            if on_epoch is not None:
                on_epoch(record)

        if cfg.early_stopping:
            if map50 > best:
                best, stale = map50, 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    logger.info(f"early stop after epoch {epoch + 1}: no mAP50 gain in {stale}")
                    break

    return TrainResult(params=params, log=log, val=list(val), val_predictions=dets)
