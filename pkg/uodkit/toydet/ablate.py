"""The four-arm ablation and the loss-weight stability sweep."""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from loguru import logger

from ..common.config import EnhanceConfig, TrainConfig
from ..common.tracing import get_tracer
from .model import count_parameters
from .synth import SynthSample
from .train import train_toy

tracer = get_tracer(__name__)

# (arm, use_dpsa, use_fgiou)
ARMS: Tuple[Tuple[str, bool, bool], ...] = (
    ("baseline", False, False),
    ("+DPSA", True, False),
    ("+FGIoU", False, True),
    ("both", True, True),
)
WEIGHT_NAMES = ("w_box", "w_cls", "w_obj")
STABILITY_FACTORS = (0.8, 1.2)


@dataclass(frozen=True)
class AblationRow:
    arm: str
    map50: float
    map50_95: float
    delta_map50: float
    delta_map50_95: float
    num_params: int


def ablate(
    base: TrainConfig,
    samples: Sequence[SynthSample],
    enhance_cfg: Optional[EnhanceConfig] = None,
) -> List[AblationRow]:
    """Train every arm from the same seed; deltas are against the baseline arm."""
    results = []
    for arm, use_dpsa, use_fgiou in ARMS:
        cfg = base.model_copy(update={"use_dpsa": use_dpsa, "use_fgiou": use_fgiou})
        with tracer.start_as_current_span("ablation_arm") as span:
            span.set_attribute("arm", arm)
            result = train_toy(cfg, samples, enhance_cfg)
        final = result.final
        results.append((arm, final.val_map50, final.val_map50_95, count_parameters(result.params)))
        logger.info(f"arm {arm}: mAP50={final.val_map50:.4f} mAP50:95={final.val_map50_95:.4f}")

    _, base50, base5095, _ = results[0]
    return [
        AblationRow(arm, m50, m5095, m50 - base50, m5095 - base5095, n)
        for arm, m50, m5095, n in results
    ]


def format_table(rows: Sequence[AblationRow]) -> str:
    lines = [
        "| Model | mAP50 | mAP50:95 | ΔmAP50 | ΔmAP50:95 | Params |",
        "|---|---|---|---|---|---|",
    ]
    for r in rows:
        lines.append(
            f"| {r.arm} | {100 * r.map50:.1f} | {100 * r.map50_95:.1f} | "
            f"{100 * r.delta_map50:+.1f} | {100 * r.delta_map50_95:+.1f} | {r.num_params:,} |"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class StabilityRow:
    weight: str
    factor: float
    map50: float
    delta_map50: float


@dataclass(frozen=True)
class StabilityReport:
    reference_map50: float
    rows: List[StabilityRow]

    @property
    def spread(self) -> float:
        values = [self.reference_map50] + [r.map50 for r in self.rows]
        return max(values) - min(values)

    @property
    def max_abs_delta(self) -> float:
        return max((abs(r.delta_map50) for r in self.rows), default=0.0)


def weight_stability(
    base: TrainConfig,
    samples: Sequence[SynthSample],
    enhance_cfg: Optional[EnhanceConfig] = None,
    factors: Sequence[float] = STABILITY_FACTORS,
) -> StabilityReport:
    """Retrain the full arm with each loss weight scaled by every factor in turn."""
    cfg = base.model_copy(update={"use_dpsa": True, "use_fgiou": True})
    reference = train_toy(cfg, samples, enhance_cfg).final.val_map50
    rows = []
    for name in WEIGHT_NAMES:
        for factor in factors:
            weights = cfg.loss_weights.scaled(name, factor)
            with tracer.start_as_current_span("stability_run") as span:
                span.set_attribute("weight", name)
                span.set_attribute("factor", factor)
                run = cfg.model_copy(update={"loss_weights": weights})
                map50 = train_toy(run, samples, enhance_cfg).final.val_map50
            rows.append(StabilityRow(name, factor, map50, map50 - reference))
            logger.info(f"{name}×{factor}: mAP50={map50:.4f} ({map50 - reference:+.4f})")
    return StabilityReport(reference, rows)


def format_stability(report: StabilityReport) -> str:
    lines = [
        f"Reference (both) mAP50: {100 * report.reference_map50:.1f}",
        "",
        "| Weight | Factor | mAP50 | ΔmAP50 |",
        "|---|---|---|---|",
    ]
    for r in report.rows:
        lines.append(
            f"| {r.weight} | {r.factor:.2f} | {100 * r.map50:.1f} | {100 * r.delta_map50:+.1f} |"
        )
    lines.append("")
    lines.append(f"Spread: {100 * report.spread:.1f} points")
    return "\n".join(lines) + "\n"
