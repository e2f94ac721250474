"""Process-level runtime settings read from the environment."""

import logging

import torch
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class RuntimeSettings(BaseSettings):
    """Environment settings (``.env`` files are honoured)."""

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

    threads: int = Field(
        default=0,
        ge=0,
        validation_alias="EEG2IMAGE_THREADS",
        description="Cap on worker threads (0 = library default)",
    )


def apply_runtime_settings(settings: RuntimeSettings | None = None) -> RuntimeSettings:
    """Apply thread limits to torch and return the settings used."""
    settings = settings or RuntimeSettings()
    if settings.threads > 0:
        torch.set_num_threads(settings.threads)
        logger.debug("torch threads capped at %d", settings.threads)
    return settings
