"""evaluate command."""

from pathlib import Path
from typing import Optional

import typer
from rich.table import Table
from typing_extensions import Annotated

from eegvis.cli.options import ConfigOption, DataOption, SeedOption, VerboseOption, prepare_run, run_config_path
from eegvis.cli.utils import console, exit_on_error, print_success
from eegvis.core.run_dir import REPORT_FILE, SCORES_FILE
from eegvis.metrics.report import ScoreReport
from eegvis.pipeline import evaluate_run, load_run_dataset


def _format(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.3f}"


def _show_report(report: ScoreReport) -> None:
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Metric", style="cyan", no_wrap=True)
    table.add_column("Value", style="white")
    table.add_row("inception score", f"{report.is_mean:.3f} ± {report.is_std:.3f}")
    table.add_row("class consistency", _format(report.class_consistency))
    table.add_row("diversity", f"{report.diversity:.4f}")
    table.add_row("encoder k-means (test)", _format(report.kmeans_acc))
    table.add_row("surrogate accuracy (test)", _format(report.surrogate_test_acc))
    table.add_row("classifier", report.classifier)
    console.print(table)


def evaluate_command(
    run: Annotated[Path, typer.Argument(help="Run directory with encoder and generator checkpoints")],
    config: ConfigOption = None,
    seed: SeedOption = None,
    data: DataOption = None,
    images_per_class: Annotated[
        Optional[int], typer.Option("--images-per-class", "-n", help="Generated images per class")
    ] = None,
    verbose: VerboseOption = False,
) -> None:
    """
    Score a trained run on the test split.

    Writes scores.json, per_class_is.csv (mean and SD per class plus All),
    embedding_2d.csv and report.md into the run directory.

    Examples:
      eegvis evaluate runs/r1
      eegvis evaluate runs/r1 --images-per-class 100
    """
    with exit_on_error("Evaluation"):
        cfg = prepare_run(
            run_config_path(config, run),
            {
                "seed": seed,
                "data.path": data,
                "output_dir": run,
                "metrics.images_per_class": images_per_class,
            },
            verbose,
        )
        ds = load_run_dataset(cfg)
        report = evaluate_run(cfg, ds, run)

    _show_report(report)
    print_success(f"Scores written to {run / SCORES_FILE} (report: {run / REPORT_FILE})")
