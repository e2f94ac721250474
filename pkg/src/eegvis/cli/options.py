"""Options shared by every command and the run setup they all perform."""

from pathlib import Path
from typing import Any, Optional

import typer
from typing_extensions import Annotated

from eegvis.cli.utils import print_info, setup_logging
from eegvis.core.config import RunConfig, load_config
from eegvis.core.run_dir import CONFIG_FILE
from eegvis.core.settings import apply_runtime_settings

ConfigOption = Annotated[
    Optional[Path], typer.Option("--config", "-c", help="Run config (JSON or YAML)")
]
SeedOption = Annotated[Optional[int], typer.Option("--seed", "-s", help="Master seed")]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="Output directory")]
DataOption = Annotated[
    Optional[Path], typer.Option("--data", "-d", help="Dataset container (default: synthetic)")
]
VerboseOption = Annotated[bool, typer.Option("--verbose", help="Debug logging")]


def prepare_run(
    config_path: Optional[Path],
    overrides: dict[str, Any],
    verbose: bool = False,
) -> RunConfig:
    """Set up logging and thread limits, then resolve the run config (flags win)."""
    setup_logging(verbose)
    settings = apply_runtime_settings()
    if settings.threads:
        print_info(f"Thread limit: {settings.threads}")
    return load_config(config_path, overrides)


def run_config_path(config_path: Optional[Path], run_dir: Path) -> Optional[Path]:
    """Explicit ``--config``, else the run directory's own config echo."""
    if config_path is not None:
        return config_path
    echo = run_dir / CONFIG_FILE
    return echo if echo.exists() else None
