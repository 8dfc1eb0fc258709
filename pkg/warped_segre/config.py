"""Settings for warped-segre, read from an optional YAML file."""

import logging
import os
from pathlib import Path
from typing import Optional, Union

import pydantic
import yaml
from pydantic import BaseModel, Field, field_validator

from warped_segre.exceptions import ValidationError
from warped_segre.models import MeanConfig

logger = logging.getLogger(__name__)

CONFIG_ENV = "WARPED_SEGRE_CONFIG"
CONFIG_DIR = Path.home() / ".warped-segre"
CONFIG_FILE = CONFIG_DIR / "config.yaml"

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseModel):
    """Tunable limits and solver defaults."""

    entry_cap: int = 10_000_000
    bdp_samples: int = 2048
    bdp_radius_factor: float = 0.01
    mean: MeanConfig = Field(default_factory=MeanConfig)
    minimize_max_iters: int = 2000
    workers: int = 1
    log_level: str = "WARNING"

    @field_validator("entry_cap", "bdp_samples", "minimize_max_iters", "workers")
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be a positive integer")
        return value

    @field_validator("bdp_radius_factor")
    @classmethod
    def _check_radius_factor(cls, value: float) -> float:
        if not 0 < value <= 0.05:
            raise ValueError("must lie in (0, 0.05]")
        return value

    @field_validator("log_level")
    @classmethod
    def _check_log_level(cls, value: str) -> str:
        level = value.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"must be one of {', '.join(LOG_LEVELS)}")
        return level


def load_settings(path: Optional[Union[str, Path]] = None) -> Settings:
    """
    Load settings from YAML.

    The file is ``path`` if given, else ``$WARPED_SEGRE_CONFIG``, else
    ``~/.warped-segre/config.yaml``. A missing file yields the defaults.

    Raises:
        ValidationError: If the file is not valid YAML or has invalid values
    """
    if path is not None:
        source = Path(path)
    elif os.environ.get(CONFIG_ENV):
        source = Path(os.environ[CONFIG_ENV])
    else:
        source = CONFIG_FILE

    if not source.exists():
        if path is not None:
            raise ValidationError(f"config file {source} does not exist")
        logger.debug("No config file at %s, using defaults", source)
        return Settings()

    try:
        with open(source, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ValidationError(f"{source}: invalid YAML: {e}") from e
    if not isinstance(data, dict):
        raise ValidationError(f"{source}: expected a mapping at the top level")

    try:
        settings = Settings.model_validate(data)
    except pydantic.ValidationError as e:
        raise ValidationError(f"{source}: {e}") from e
    logger.debug("Loaded settings from %s", source)
    return settings
