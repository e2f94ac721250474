"""generate command."""

from pathlib import Path
from typing import Optional

import typer
from typing_extensions import Annotated

from eegvis.cli.options import ConfigOption, DataOption, SeedOption, VerboseOption, prepare_run, run_config_path
from eegvis.cli.utils import exit_on_error, print_success
from eegvis.core.seeding import derive_seed
from eegvis.pipeline import generate_grid, load_run_dataset


def generate_command(
    run: Annotated[Path, typer.Argument(help="Run directory with encoder and generator checkpoints")],
    per_class: Annotated[int, typer.Option("--per-class", "-n", min=1, help="Images per class")] = 8,
    out: Annotated[Optional[Path], typer.Option("--out", "-o", help="PNG file to write")] = None,
    config: ConfigOption = None,
    seed: SeedOption = None,
    data: DataOption = None,
    verbose: VerboseOption = False,
) -> None:
    """
    Generate an image grid from test-split EEG, one row per class.

    Examples:
      eegvis generate runs/r1
      eegvis generate runs/r1 --per-class 16 --seed 3 --out grid.png
    """
    with exit_on_error("Generation"):
        cfg = prepare_run(
            run_config_path(config, run), {"seed": seed, "data.path": data, "output_dir": run}, verbose
        )
        ds = load_run_dataset(cfg)
        path = generate_grid(run, ds, per_class, derive_seed(cfg.seed, "metrics"), out, cfg.device)

    print_success(f"Grid written to {path}")
