"""Configuration management using Pydantic Settings.

Loads configuration from multiple sources with the following priority (highest first):
1. Environment variables (GA2C_* prefix)
2. .env file
3. config.local.yaml (if exists)
4. config.yaml
5. Default values
"""

from functools import lru_cache
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from ga2c.utils.errors import ConfigurationError


class LoggingSettings(BaseModel):
    """Logging configuration."""

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    format: Literal["json", "text"] = "json"


class DataSettings(BaseModel):
    """Dataset location and download configuration."""

    data_dir: Path = Path("data")
    download_base_url: str = "https://linqs-data.soe.ucsc.edu/public/lbc"
    download_timeout_seconds: int = Field(default=60, ge=1, le=600)
    max_retries: int = Field(default=3, ge=1, le=10)


class VictimConfig(BaseModel):
    """Hyperparameters of the 2-layer GCN victim."""

    hidden: int = Field(default=16, ge=1, description="Hidden width of the first GCL")
    dropout: float = Field(default=0.5, ge=0.0, lt=1.0)
    lr: float = Field(default=0.01, gt=0.0)
    weight_decay: float = Field(default=5e-4, ge=0.0, description="L2 on the first layer")
    epochs: int = Field(default=200, ge=1)
    normalize_features: bool = Field(
        default=True,
        description="Row-normalize binary features before the first layer",
    )


class AttackerConfig(BaseModel):
    """Hyperparameters shared by the node generator, edge sampler and value predictor."""

    num_layers: int = Field(default=2, ge=1, description="Stacked GCLs per network (K)")
    hidden: int = Field(default=64, ge=1, description="GCL output width (d)")
    temperature: float = Field(default=1.0, gt=0.0, description="Gumbel temperature (tau)")
    alpha_n: float = Field(
        default=0.5,
        ge=0.0,
        le=1.0,
        description="Weight of the learned distribution against the subgraph mean",
    )
    terminal_bonus: float = Field(default=1.0, ge=0.0, description="Extra reward on a flip")
    clamp_eps: float = Field(default=1e-6, gt=0.0, lt=0.5)
    readout: Literal["max", "sum"] = "max"
    feature_sampler: Literal["gumbel", "topk"] = "gumbel"
    reward: Literal["loss", "flip"] = "loss"
    edge_prior: bool = True


class TrainConfig(BaseModel):
    """Actor-critic training configuration."""

    gamma: float = Field(default=0.95, gt=0.0, le=1.0)
    batch_size: int = Field(default=10, ge=1, description="Episodes per update")
    lr: float = Field(default=1e-3, gt=0.0)
    patience: int = Field(default=100, ge=0, description="Epochs without probe improvement")
    max_epochs: int = Field(default=1000, ge=1)
    probe_size: int = Field(default=50, ge=1)
    seed: int = 0


class EvaluationSettings(BaseModel):
    """Attack evaluation configuration."""

    workers: int = Field(default=1, ge=1, le=64)
    show_progress: bool = True


def _load_yaml_config(config_dir: Path) -> dict:
    """Load configuration from YAML files.

    Loads config.yaml and optionally overlays config.local.yaml.
    """
    config = {}

    config_file = config_dir / "config.yaml"
    if config_file.exists():
        with open(config_file) as f:
            config = yaml.safe_load(f) or {}

    local_config_file = config_dir / "config.local.yaml"
    if local_config_file.exists():
        with open(local_config_file) as f:
            local_config = yaml.safe_load(f) or {}
            config = _deep_merge(config, local_config)

    return config


def _deep_merge(base: dict, override: dict) -> dict:
    """Deep merge two dictionaries, with override taking precedence."""
    result = base.copy()
    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = value
    return result


class Settings(BaseSettings):
    """Application settings loaded from environment, .env, and config files."""

    model_config = SettingsConfigDict(
        env_prefix="GA2C_",
        env_nested_delimiter="__",
        env_file=Path.home() / "ga2c.env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    data: DataSettings = Field(default_factory=DataSettings)
    victim: VictimConfig = Field(default_factory=VictimConfig)
    attacker: AttackerConfig = Field(default_factory=AttackerConfig)
    training: TrainConfig = Field(default_factory=TrainConfig)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)

    def __init__(self, config_dir: Path | None = None, **data):
        """Initialize settings, loading from YAML if config_dir provided."""
        if config_dir is not None:
            yaml_config = _load_yaml_config(config_dir)
            merged = _deep_merge(yaml_config, data)
            super().__init__(**merged)
        else:
            super().__init__(**data)

    def validate_required(self, need_data_dir: bool = False) -> None:
        """Validate that required settings are present.

        Args:
            need_data_dir: Whether the data directory must already exist.

        Raises:
            ConfigurationError: If required settings are missing.
        """
        if need_data_dir and not self.data.data_dir.is_dir():
            raise ConfigurationError(f"Data directory does not exist: {self.data.data_dir}")

        if self.attacker.feature_sampler == "topk" and self.attacker.temperature != 1.0:
            raise ConfigurationError("attacker.temperature has no effect with the topk sampler")


@lru_cache
def get_settings(config_dir: Path | None = None) -> Settings:
    """Get cached settings instance.

    Args:
        config_dir: Optional path to config directory. If None, only environment
                   variables and .env file are used.

    Returns:
        Settings instance.
    """
    if config_dir is None:
        project_root = Path(__file__).parent.parent.parent
        default_config_dir = project_root / "config"
        if default_config_dir.exists():
            config_dir = default_config_dir

    return Settings(config_dir=config_dir)
