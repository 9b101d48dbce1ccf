"""Gradient and loss-value suites behind ``uodkit gradcheck`` and ``uodkit losscheck``."""

import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger

from .common.config import FocalParams, LossWeights
from .common.exceptions import ValidationFailure
from .common.tracing import get_tracer
from .dpsa import (
    channel_attention,
    channel_attention_backward,
    channel_attention_with_cache,
    dpsa_backward,
    dpsa_forward,
    dpsa_with_cache,
    init_channel_attention,
    init_dpsa,
    init_spatial_attention,
    init_sppf,
    spatial_attention,
    spatial_attention_backward,
    spatial_attention_with_cache,
    sppf_backward,
    sppf_with_cache,
)
from .fgiou import (
    AnchorPredictions,
    fgiou_loss_and_grad,
    fgiou_total,
    focal_loss,
    giou_loss,
    giou_loss_grad,
    iou,
    obj_focal_loss,
)
from .fgiou.assigner import task_aligned_assign
from .fgiou.losses import focal_from_probs, focal_terms
from .numcore import (
    CHECK_DTYPE,
    ConvParams,
    DifferentiableOp,
    adaptive_pool,
    adaptive_pool_backward,
    block_grad_errors,
    broadcast_mul,
    broadcast_mul_backward,
    channel_concat,
    channel_pool,
    channel_pool_backward,
    channel_split,
    conv2d,
    conv2d_backward,
    grad_check,
    max_relative_error,
    maxpool2d,
    maxpool2d_backward,
    numeric_gradient,
    relu,
    relu_backward,
    sigmoid,
    sigmoid_backward,
    silu,
    silu_backward,
)
from .toydet.model import backward, decode, decode_backward, forward_with_cache, init_toynet
from .toydet.synth import synth_sample

tracer = get_tracer(__name__)

GRAD_TOL = 1e-5
NETWORK_TOL = 1e-3
LOSS_TOL = 1e-6
GRAD_SEEDS = 20
NETWORK_SEEDS = 3
NETWORK_GROUPS = ("stem.", "down1.", "down2.", "sppf.", "head.")
# Relative errors below this gradient magnitude are measured against the floor.
NETWORK_FLOOR = 1e-6
CORRUPTION = 1.5

# A check draws its inputs from the generator and returns its max relative error.
# The float scales the analytic gradient; anything but 1.0 simulates a broken backward.
GradCheck = Callable[[np.random.Generator, float], float]


@dataclass(frozen=True)
class CheckResult:
    name: str
    error: float
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.error) and self.error < self.tol


def _spaced(rng: np.random.Generator, shape: Sequence[int]) -> np.ndarray:
    """Distinct half-integer multiples of 0.01, so no max or ReLU kink is within eps."""
    n = int(np.prod(shape))
    return ((rng.permutation(n) + 0.5 - n // 2) * 0.01).reshape(shape)


def _op_error(name: str, forward, backward, x: np.ndarray, scale: float) -> float:
    op = DifferentiableOp(name, forward, lambda v, dy: scale * backward(v, dy))
    return grad_check(op, x)


def _block_error(
    forward, backward, x, params, scale: float, cotangent=None, eps: float = 1e-5
) -> float:
    def scaled(v, dy):
        dx, grads = backward(v, dy)
        return scale * dx, {k: scale * g for k, g in grads.items()}

    errors = block_grad_errors(forward, scaled, x, params, cotangent, eps)
    return max(errors.values())


def _conv(rng, scale):
    p = ConvParams(
        weight=rng.normal(size=(3, 2, 3, 3)), bias=rng.normal(size=3), stride=1, padding=1
    )

    def backward_(v, dy):
        g = conv2d_backward(dy, v, p)
        return g.dx, {"weight": g.dweight, "bias": g.dbias}

    x = rng.normal(size=(1, 2, 6, 5))
    return _block_error(lambda v: conv2d(v, p), backward_, x, p.named_parameters(), scale)


def _conv_strided(rng, scale):
    p = ConvParams(weight=rng.normal(size=(2, 2, 3, 3)), bias=None, stride=2, padding=1)
    x = rng.normal(size=(1, 2, 8, 8))
    return _op_error(
        "conv2d_strided",
        lambda v: conv2d(v, p),
        lambda v, dy: conv2d_backward(dy, v, p).dx,
        x,
        scale,
    )


def _maxpool(rng, scale):
    x = _spaced(rng, (1, 2, 9, 9))
    return max(
        _op_error(
            f"maxpool{k}",
            lambda v, k=k: maxpool2d(v, k),
            lambda v, dy, k=k: maxpool2d_backward(dy, v, k),
            x,
            scale,
        )
        for k in (5, 9, 13)
    )


def _adaptive_pool(rng, scale):
    x = _spaced(rng, (2, 3, 4, 5))
    return max(
        _op_error(
            f"adaptive_{mode}",
            lambda v, m=mode: adaptive_pool(v, m),
            lambda v, dy, m=mode: adaptive_pool_backward(dy, v, m),
            x,
            scale,
        )
        for mode in ("avg", "max")
    )


def _channel_pool(rng, scale):
    x = _spaced(rng, (2, 4, 3, 3))
    return max(
        _op_error(
            f"channel_{mode}",
            lambda v, m=mode: channel_pool(v, m),
            lambda v, dy, m=mode: channel_pool_backward(dy, v, m),
            x,
            scale,
        )
        for mode in ("mean", "max")
    )


def _sigmoid(rng, scale):
    x = rng.normal(scale=3.0, size=(2, 3, 4, 4))
    return _op_error("sigmoid", sigmoid, lambda v, dy: sigmoid_backward(dy, sigmoid(v)), x, scale)


def _silu(rng, scale):
    return _op_error(
        "silu", silu, lambda v, dy: silu_backward(dy, v), rng.normal(size=(2, 3, 4, 4)), scale
    )


def _relu(rng, scale):
    return _op_error(
        "relu", relu, lambda v, dy: relu_backward(dy, v), _spaced(rng, (2, 3, 4, 4)), scale
    )


def _concat(rng, scale):
    def forward(v):
        return channel_concat([v, v * v])

    def backward_(v, dy):
        d1, d2 = channel_split(dy, [v.shape[1], v.shape[1]])
        return d1 + 2.0 * v * d2

    return _op_error("channel_concat", forward, backward_, rng.normal(size=(1, 2, 3, 3)), scale)


def _broadcast_mul(rng, scale):
    x = rng.normal(size=(2, 3, 4, 4))
    errors = []
    for shape in ((2, 3, 1, 1), (2, 1, 4, 4)):
        w = rng.normal(size=shape)

        def backward_(v, dy, w=w):
            dx, dw = broadcast_mul_backward(dy, v, w)
            return dx, {"w": dw}

        errors.append(
            _block_error(lambda v, w=w: broadcast_mul(v, w), backward_, x, {"w": w}, scale)
        )
    return max(errors)


def _channel_attention(rng, scale):
    p = init_channel_attention(rng, 6, dtype=CHECK_DTYPE)
    # keep the hidden unit clear of the ReLU kink
    p.reduce.bias[:] = 0.3
    return _block_error(
        lambda v: channel_attention(v, p)[1],
        lambda v, dy: channel_attention_backward(dy, channel_attention_with_cache(v, p), p),
        _spaced(rng, (2, 6, 3, 4)),
        p.named_parameters(),
        scale,
    )


def _spatial_attention(rng, scale):
    p = init_spatial_attention(rng, dtype=CHECK_DTYPE)
    return _block_error(
        lambda v: spatial_attention(v, p)[1],
        lambda v, dy: spatial_attention_backward(dy, spatial_attention_with_cache(v, p), p),
        _spaced(rng, (1, 3, 5, 5)),
        p.named_parameters(),
        scale,
    )


def _dpsa(rng, scale):
    p = init_dpsa(rng, 4, dtype=CHECK_DTYPE)
    p.channel.reduce.bias[:] = 0.3
    return _block_error(
        lambda v: dpsa_forward(v, p),
        lambda v, dy: dpsa_backward(dy, dpsa_with_cache(v, p), p),
        _spaced(rng, (1, 4, 5, 5)),
        p.named_parameters(),
        scale,
    )


def _dpsa_sppf(rng, scale):
    p = init_sppf(rng, 4, use_dpsa=True, dtype=CHECK_DTYPE)
    p.dpsa.channel.reduce.bias[:] = 0.3
    x = rng.normal(size=(1, 4, 6, 6))
    return _block_error(
        lambda v: sppf_with_cache(v, p).out,
        lambda v, dy: sppf_backward(dy, sppf_with_cache(v, p), p),
        x,
        p.named_parameters(),
        scale,
        cotangent=rng.normal(size=(1, 4, 6, 6)),
        # pool inputs are not spaced, so the step must stay below their gaps
        eps=1e-6,
    )


def _random_box(rng) -> np.ndarray:
    x, y = rng.uniform(0, 5, size=2)
    w, h = rng.uniform(0.5, 5, size=2)
    return np.array([x, y, x + w, y + h])


def _giou(rng, scale):
    pred, target = _random_box(rng), _random_box(rng)
    _, grad = giou_loss_grad(pred, target)
    numeric = numeric_gradient(lambda: giou_loss_grad(pred, target)[0], pred)
    return max_relative_error(scale * grad, numeric)


def _focal(rng, scale):
    t = rng.choice([0.0, 1.0, 0.8, 0.3], size=(6, 3))
    return _op_error(
        "focal",
        lambda z: focal_terms(z, t)[0],
        lambda z, dy: dy * focal_terms(z, t)[1],
        rng.normal(scale=2.0, size=(6, 3)),
        scale,
    )


GRAD_CHECKS: Dict[str, GradCheck] = {
    "conv2d": _conv,
    "conv2d_strided": _conv_strided,
    "maxpool2d": _maxpool,
    "adaptive_pool": _adaptive_pool,
    "channel_pool": _channel_pool,
    "sigmoid": _sigmoid,
    "silu": _silu,
    "relu": _relu,
    "channel_concat": _concat,
    "broadcast_mul": _broadcast_mul,
    "channel_attention": _channel_attention,
    "spatial_attention": _spatial_attention,
    "dpsa": _dpsa,
    "dpsa_sppf": _dpsa_sppf,
    "giou_loss": _giou,
    "focal": _focal,
}


def network_spot_check(seed: int, scale: float = 1.0) -> Dict[str, float]:
    """Whole-detector check: one random entry per layer group, float64, one image.

    The loss is the FGIoU total with the assignment computed once at the
    unperturbed parameters, which is what training differentiates.
    """
    rng = np.random.default_rng(seed)
    params = init_toynet(rng, use_dpsa=True, dtype=CHECK_DTYPE)
    params.sppf.dpsa.channel.reduce.bias[:] = 0.3
    sample = synth_sample(seed)
    x = sample.image.astype(CHECK_DTYPE).transpose(2, 0, 1)[None].copy()

    cache = forward_with_cache(params, x)
    pred = decode(cache.out)[0]
    assign = task_aligned_assign(
        pred.cls_probs, pred.boxes, pred.anchors, sample.boxes, sample.classes
    )
    _, pred_grads = fgiou_loss_and_grad(pred, sample.boxes, sample.classes, assign=assign)
    _, grads = backward(decode_backward([pred_grads], cache.out), cache, params)

    def loss() -> float:
        p = decode(forward_with_cache(params, x).out)[0]
        return fgiou_total(p, sample.boxes, sample.classes, assign=assign).total

    named = params.named_parameters()
    errors = {}
    for group in NETWORK_GROUPS:
        name = str(rng.choice(sorted(n for n in named if n.startswith(group))))
        value = named[name]
        idx = tuple(int(rng.integers(d)) for d in value.shape)
        numeric = float(numeric_gradient(loss, value, indices=[idx])[idx])
        analytic = scale * float(grads[name][idx])
        denom = max(abs(analytic), abs(numeric), NETWORK_FLOOR)
        errors[f"{name}{list(idx)}"] = abs(analytic - numeric) / denom
    return errors


def run_gradcheck(
    seed: int = 0,
    tol: float = GRAD_TOL,
    seeds: int = GRAD_SEEDS,
    network_seeds: int = NETWORK_SEEDS,
    corrupt: Optional[str] = None,
) -> List[CheckResult]:
    """Every gradient check over ``seeds`` generators derived from ``seed``.

    ``corrupt`` names one check (or ``"toynet"``) whose analytic gradient is
    deliberately scaled, to exercise the failure path.
    """
    if corrupt is not None and corrupt not in GRAD_CHECKS and corrupt != "toynet":
        raise ValueError(f"unknown check '{corrupt}'")
    children = np.random.SeedSequence(seed).spawn(seeds)
    results = []
    for name, check in GRAD_CHECKS.items():
        scale = CORRUPTION if name == corrupt else 1.0
        with tracer.start_as_current_span("gradcheck") as span:
            span.set_attribute("check", name)
            started = time.perf_counter()
            worst = max(check(np.random.default_rng(child), scale) for child in children)
        results.append(CheckResult(name, worst, tol, f"{seeds} seeds"))
        logger.debug(f"{name}: max rel error {worst:.2e} ({time.perf_counter() - started:.2f}s)")

    scale = CORRUPTION if corrupt == "toynet" else 1.0
    worst = 0.0
    for i in range(network_seeds):
        worst = max(worst, *network_spot_check(seed + i, scale).values())
    results.append(CheckResult("toynet", worst, NETWORK_TOL, f"{network_seeds} seeds"))
    return results


@dataclass(frozen=True)
class LossCase:
    name: str
    got: float
    expected: float

    def result(self, tol: float = LOSS_TOL) -> CheckResult:
        return CheckResult(
            self.name, abs(self.got - self.expected), tol, f"{self.got:.6f} vs {self.expected:.6f}"
        )


def _three_anchor_case() -> LossCase:
    gt, gt_cls = np.array([[0.0, 0.0, 4.0, 4.0]]), np.array([0])
    pred = AnchorPredictions.from_probs(
        anchors=np.array([[1.0, 1.0], [3.0, 3.0], [10.0, 10.0]]),
        boxes=np.array([[0.0, 0.0, 4.0, 4.0], [2.0, 0.0, 4.0, 4.0], [8.0, 8.0, 12.0, 12.0]]),
        cls_probs=np.array([[0.64, 0.1], [0.81, 0.2], [0.3, 0.4]]),
        obj_probs=np.array([0.7, 0.3, 0.05]),
    )
    # anchor IoUs 1 and 1/2; metrics sqrt(s) * IoU^6 = 0.8 and 0.9 / 64
    t0, t1 = 0.8 / (0.8 + 1e-9), (0.9 / 64) / (0.8 + 1e-9)
    giou = (0.0 + 0.5) / 2
    focal = (
        0.25 * 0.36**2 * -math.log(0.64)
        + 0.75 * 0.1**2 * -math.log(0.9)
        + 0.25 * 0.19**2 * -math.log(0.81)
        + 0.75 * 0.2**2 * -math.log(0.8)
    ) / 4
    obj = (
        0.25 * 0.3**2 * -(t0 * math.log(0.7) + (1 - t0) * math.log(0.3))
        + 0.75 * 0.3**2 * -(t1 * math.log(0.3) + (1 - t1) * math.log(0.7))
        + 0.75 * 0.05**2 * -math.log(0.95)
    ) / 3
    expected = 7.5 * giou + 0.5 * focal + 1.0 * obj
    return LossCase("fgiou three-anchor composition", fgiou_total(pred, gt, gt_cls).total, expected)


def _no_foreground_case() -> LossCase:
    pred = AnchorPredictions.from_probs(
        anchors=np.array([[20.0, 20.0], [30.0, 30.0]]),
        boxes=np.array([[18.0, 18.0, 22.0, 22.0], [28.0, 28.0, 32.0, 32.0]]),
        cls_probs=np.array([[0.2, 0.3], [0.4, 0.1]]),
        obj_probs=np.array([0.2, 0.6]),
    )
    out = fgiou_total(pred, np.array([[0.0, 0.0, 4.0, 4.0]]), np.array([1]))
    return LossCase("fgiou zero foreground is objectness only", out.total, out.obj_focal)


def _weight_linearity_case() -> LossCase:
    pred = AnchorPredictions.from_probs(
        anchors=np.array([[2.0, 2.0]]),
        boxes=np.array([[1.0, 0.0, 4.0, 4.0]]),
        cls_probs=np.array([[0.7]]),
        obj_probs=np.array([0.6]),
    )
    gt, gt_cls = np.array([[0.0, 0.0, 4.0, 4.0]]), np.array([0])
    base = fgiou_total(pred, gt, gt_cls)
    doubled = fgiou_total(pred, gt, gt_cls, w=LossWeights().scaled("w_box", 2.0))
    return LossCase(
        "fgiou doubling w_box doubles the box term",
        doubled.total - base.total,
        LossWeights().w_box * base.giou,
    )


def loss_cases() -> List[LossCase]:
    quarter_ln2 = 0.25 * 0.25 * math.log(2.0)
    return [
        LossCase("iou identical", float(iou([0, 0, 2, 2], [0, 0, 2, 2])), 1.0),
        LossCase("iou disjoint", float(iou([0, 0, 1, 1], [3, 3, 4, 4])), 0.0),
        LossCase("iou half overlap", float(iou([0, 0, 2, 2], [1, 0, 3, 2])), 1.0 / 3.0),
        LossCase("giou identical", float(giou_loss([1, 2, 4, 6], [1, 2, 4, 6])), 0.0),
        LossCase("giou disjoint", float(giou_loss([0, 0, 1, 1], [2, 0, 3, 1])), 4.0 / 3.0),
        LossCase("giou nested is 1 - iou", float(giou_loss([0, 0, 4, 4], [1, 1, 3, 3])), 0.75),
        LossCase("giou degenerate pair", float(giou_loss([2, 2, 2, 2], [2, 2, 2, 2])), 1.0),
        LossCase("focal true class at p_t=0.5", float(focal_from_probs(0.5, 1.0)), quarter_ln2),
        LossCase("focal confident positive", float(focal_from_probs(1.0 - 1e-9, 1.0)), 0.0),
        LossCase(
            "focal gamma=0 is weighted CE",
            float(focal_from_probs(0.8, 1.0, FocalParams(gamma=0.0))),
            -0.25 * math.log(0.8),
        ),
        LossCase(
            "focal_loss averages the classes",
            float(focal_loss(np.array([[0.5, 0.5]]), np.array([0]))[0]),
            (0.25 + 0.75) * 0.25 * math.log(2.0) / 2,
        ),
        LossCase("obj_focal t=1 p=0.5", float(obj_focal_loss(0.5, 1.0)), quarter_ln2),
        LossCase("obj_focal t=0 p->0", float(obj_focal_loss(1e-9, 0.0)), 0.0),
        LossCase("obj_focal t=1 p->1", float(obj_focal_loss(1.0 - 1e-9, 1.0)), 0.0),
        _three_anchor_case(),
        _no_foreground_case(),
        _weight_linearity_case(),
    ]


def run_losscheck(tol: float = LOSS_TOL) -> List[CheckResult]:
    return [case.result(tol) for case in loss_cases()]


def require_passing(results: Sequence[CheckResult]) -> None:
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise ValidationFailure(failed)


def format_results(results: Sequence[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [
        f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.error:.3e} < {r.tol:.0e}"
        f"  {r.detail}".rstrip()
        for r in results
    ]
    return "\n".join(lines)
