"""Configuration management for eegvis runs."""

import json
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from eegvis.core.errors import ConfigError


def is_power_of_two(value: int) -> bool:
    return value > 0 and (value & (value - 1)) == 0


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SyntheticSpec(_Section):
    """Parameters of the synthetic paired EEG/image generator."""

    num_classes: int = Field(default=10, ge=2, description="Number of classes K")
    per_class: int = Field(default=23, ge=2, description="EEG samples per class")
    channels: int = Field(default=14, ge=1, description="EEG channels C")
    timesteps: int = Field(default=32, ge=1, description="Samples per window T")
    image_size: int = Field(default=32, description="Image side H (power of two)")
    seed: int | None = Field(default=None, description="Generator seed (None: derived from run seed)")
    test_fraction: float = Field(default=0.1, gt=0.0, lt=1.0, description="Per-class test share")

    @field_validator("image_size")
    @classmethod
    def validate_image_size(cls, v: int) -> int:
        """Image pipeline upsamples by factors of two."""
        if not is_power_of_two(v) or v < 8:
            raise ValueError(f"image_size must be a power of two >= 8, got {v}")
        return v


class DataConfig(_Section):
    """Where the paired dataset comes from."""

    path: Path | None = Field(default=None, description="Dataset container directory")
    synthetic: SyntheticSpec = Field(default_factory=SyntheticSpec)


class EncoderConfig(_Section):
    """EEG feature extractor settings."""

    regime: Literal["triplet", "softmax"] = Field(default="triplet")
    margin: float = Field(default=0.2, ge=0.0, description="Triplet margin beta")
    batch_classes: int = Field(default=10, ge=2, description="Classes per batch P")
    batch_per_class: int = Field(default=8, ge=2, description="Samples per class per batch Kb")
    mining: Literal["semi_hard", "hard", "all_valid"] = Field(default="semi_hard")
    epochs: int = Field(default=50, ge=0)
    lr: float = Field(default=1e-3, gt=0.0)
    hidden_size: int = Field(default=128, ge=1)
    output_norm: bool = Field(default=True, description="L2-normalise embeddings")


class AugmentConfig(_Section):
    """Differentiable augmentation policy."""

    ops: list[Literal["translation", "brightness", "saturation", "contrast"]] = Field(
        default=["translation", "brightness", "saturation", "contrast"]
    )
    translation_ratio: float = Field(default=0.125, ge=0.0, le=0.5)
    brightness: float = Field(default=0.5, ge=0.0, description="Additive shift half-width")
    saturation: tuple[float, float] = Field(default=(0.0, 2.0))
    contrast: tuple[float, float] = Field(default=(0.5, 1.5))

    @field_validator("saturation", "contrast")
    @classmethod
    def validate_range(cls, v: tuple[float, float]) -> tuple[float, float]:
        low, high = v
        if low < 0 or high < low:
            raise ValueError(f"Invalid factor range: {v}")
        return v


class GanConfig(_Section):
    """Conditional GAN settings."""

    alpha: float = Field(default=1.0, ge=0.0, description="Mode-seeking weight")
    use_ms: bool = Field(default=True, description="Enable mode-seeking regularisation")
    use_aug: bool = Field(default=True, description="Enable differentiable augmentation")
    eps_ms: float = Field(default=1e-5, gt=0.0, description="Mode-seeking denominator guard")
    d_steps_per_g_step: int = Field(default=1, ge=1)
    steps: int = Field(default=2000, ge=0)
    batch_size: int = Field(default=32, ge=2, description="Batch norm needs two samples")
    latent_dim: int = Field(default=128, ge=1)
    base_channels: int = Field(default=256, ge=8, description="Generator channels at 4x4")
    cond_channels: int = Field(default=16, ge=1, description="Broadcast condition channels in D")
    lr: float = Field(default=2e-4, gt=0.0)
    beta1: float = Field(default=0.5, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    log_every: int = Field(default=50, ge=1)
    eval_every: int = Field(default=500, ge=1)
    sample_every: int = Field(default=500, ge=1)
    checkpoint_every: int = Field(default=500, ge=1)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)


class MetricsConfig(_Section):
    """Evaluation settings."""

    restarts: int = Field(default=10, ge=1, description="k-means restarts")
    max_iter: int = Field(default=300, ge=1, description="k-means iterations per restart")
    splits: int = Field(default=10, ge=1, description="Inception score splits")
    images_per_class: int = Field(default=50, ge=1, description="Generated images per class")
    surrogate_epochs: int = Field(default=30, ge=0)
    surrogate_lr: float = Field(default=1e-3, gt=0.0)


class RunConfig(_Section):
    """Full experiment description."""

    data: DataConfig = Field(default_factory=DataConfig)
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)
    gan: GanConfig = Field(default_factory=GanConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    output_dir: Path = Field(default=Path("runs/default"))
    seed: int = Field(default=0, ge=0, description="Master seed")
    device: str = Field(default="cpu", description="torch device")

    @model_validator(mode="after")
    def validate_device(self) -> "RunConfig":
        if not (self.device == "cpu" or self.device.startswith("cuda")):
            raise ValueError(f"Unsupported device: {self.device}")
        return self

    @classmethod
    def load_from_file(cls, config_path: Path) -> "RunConfig":
        """Load configuration from a JSON (or YAML) document."""
        if not config_path.exists():
            raise ConfigError(f"Config file not found: {config_path}")

        with open(config_path) as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigError(f"Cannot parse {config_path}: {e}") from e

        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(str(e)) from e

    def save_to_file(self, config_path: Path) -> None:
        """Write the resolved configuration as JSON."""
        config_path.parent.mkdir(parents=True, exist_ok=True)
        config_path.write_text(self.to_json())

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=False) + "\n"


def _set_nested(data: dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    current = data
    for part in parts[:-1]:
        current = current.setdefault(part, {})
        if not isinstance(current, dict):
            raise ConfigError(f"Invalid config path: {key}")
    current[parts[-1]] = value


def load_config(
    config_path: Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunConfig:
    """
    Load configuration and apply flag overrides.

    Priority:
    1. Overrides (dotted keys, e.g. ``gan.use_ms``); ``None`` values are skipped
    2. Specified config_path
    3. Default configuration
    """
    data: dict[str, Any] = {}
    if config_path is not None:
        data = RunConfig.load_from_file(config_path).model_dump(mode="json")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if isinstance(value, Path):
            value = str(value)
        _set_nested(data, key, value)

    return RunConfig.from_dict(data)
