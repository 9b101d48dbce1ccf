import os
from functools import lru_cache
from pathlib import Path
from typing import Optional, Tuple

import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)
from pydantic_settings import (
    BaseSettings,
    SettingsConfigDict,
)


def _ordered_pair(v: Tuple[float, float]) -> Tuple[float, float]:
    low, high = v
    if low > high:
        raise ValueError(f"clamp range {v} is not ordered (low > high)")
    return v


class EnhanceConfig(BaseModel):
    """Fixed hyperparameters of the four-stage enhancement pipeline.

    The pipeline has no learnable parameters; the model is frozen so a config
    cannot drift between the stages of one run.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    red_gain_clamp: Tuple[float, float] = (1.0, 3.0)
    blue_gain_clamp: Tuple[float, float] = (0.5, 1.5)
    clahe_clip: float = Field(default=2.0, gt=0)
    clahe_tiles: Tuple[int, int] = (8, 8)
    dehaze_omega: float = Field(default=0.75, gt=0, le=1)
    dehaze_t_floor: float = Field(default=0.1, gt=0, le=1)
    dehaze_sigma_divisor: float = Field(default=30.0, gt=0)
    guided_radius: int = Field(default=4, ge=1)
    guided_eps: float = Field(default=1e-3, gt=0)
    sharpen_beta: float = Field(default=0.5, ge=0)

    @field_validator("red_gain_clamp", "blue_gain_clamp")
    @classmethod
    def _ordered_clamps(cls, v):
        return _ordered_pair(v)

    @field_validator("clahe_tiles")
    @classmethod
    def _positive_tiles(cls, v):
        if min(v) < 1:
            raise ValueError("clahe_tiles entries must be >= 1")
        return v


class FocalParams(BaseModel):
    """Focal modulation shared by the class and objectness terms."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(default=0.25, gt=0, lt=1)
    gamma: float = Field(default=2.0, ge=0)


class LossWeights(BaseModel):
    """Weights of the box, class and objectness terms of the composite loss."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    w_box: float = Field(default=7.5, ge=0)
    w_cls: float = Field(default=0.5, ge=0)
    w_obj: float = Field(default=1.0, ge=0)

    def scaled(self, name: str, factor: float) -> "LossWeights":
        """Return a copy with one weight multiplied by ``factor``."""
        return self.model_copy(update={name: getattr(self, name) * factor})


class TrainConfig(BaseModel):
    """Toy detector training run. The flags select the ablation arm."""

    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(default=30, ge=1)
    lr: float = Field(default=0.01, ge=0)
    momentum: float = Field(default=0.937, ge=0, lt=1)
    weight_decay: float = Field(default=0.0005, ge=0)
    batch: int = Field(default=16, ge=1)
    seed: int = 0
    use_dpsa: bool = True
    use_fgiou: bool = True
    use_enhance: bool = False
    loss_weights: LossWeights = Field(default_factory=LossWeights)
    focal: FocalParams = Field(default_factory=FocalParams)
    val_fraction: float = Field(default=0.2, gt=0, lt=1)
    cosine_lr: bool = True
    final_lr_ratio: float = Field(default=0.01, ge=0, le=1)
    early_stopping: bool = False
    patience: int = Field(default=10, ge=1)
    max_grad_norm: Optional[float] = Field(default=10.0, gt=0)
    conf_threshold: float = Field(default=0.001, ge=0, le=1)
    nms_iou: float = Field(default=0.5, gt=0, le=1)
    max_detections: int = Field(default=100, ge=1)
    num_classes: int = Field(default=3, ge=1)
    workers: int = Field(default=1, ge=1)

    def arm_name(self) -> str:
        if self.use_dpsa and self.use_fgiou:
            return "both"
        if self.use_dpsa:
            return "+DPSA"
        if self.use_fgiou:
            return "+FGIoU"
        return "baseline"


class Tracing(BaseModel):
    enabled: bool = Field(default=False)

    @model_validator(mode="before")
    def check_otel_sdk_disabled(cls, data):
        # Tracing stays off unless OTEL_SDK_DISABLED=false is set explicitly.
        if os.environ.get("OTEL_SDK_DISABLED", "true").lower() == "false":
            data = {"enabled": True}
        return data


class Settings(BaseSettings):
    """
    Application settings, loaded from environment variables and an optional
    JSON/YAML override file.
    """

    enhance: EnhanceConfig = Field(default_factory=EnhanceConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    tracing: Tracing = Field(default_factory=Tracing)

    model_config = SettingsConfigDict(
        env_prefix="UODKIT_",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="forbid",
    )


def load_overrides(path: Path) -> dict:
    """Read an override file. JSON is a subset of YAML, so one parser covers both."""
    with open(path, "r") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"{path}: not valid JSON or YAML ({e})") from e
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a mapping, got {type(data).__name__}")
    return data


def load_settings(config_path: Optional[Path] = None) -> Settings:
    """Build settings with ``config_path`` overrides layered over env and defaults."""
    if config_path is None:
        return get_settings()
    overrides = load_overrides(config_path)
    base = get_settings().model_dump()
    for section, values in overrides.items():
        if section not in base:
            raise ValueError(f"{config_path}: unknown config section '{section}'")
        if not isinstance(values, dict):
            raise ValueError(f"{config_path}: section '{section}' must be a mapping")
        base[section] = _merge(base[section], values)
    return Settings.model_validate(base)


def _merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


@lru_cache
def get_settings() -> Settings:
    return Settings()
