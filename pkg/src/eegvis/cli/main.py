"""Main CLI entry point for eegvis."""

import typer
from typing_extensions import Annotated

from eegvis import __version__
from eegvis.cli.commands import (
    ablate as ablate_cmd,
    evaluate as evaluate_cmd,
    generate as generate_cmd,
    synth_data as synth_data_cmd,
    train_encoder as train_encoder_cmd,
    train_gan as train_gan_cmd,
)
from eegvis.cli.utils import console

# Create the main Typer app
app = typer.Typer(
    name="eegvis",
    help="Contrastive EEG features and data-efficient conditional image synthesis",
    add_completion=False,
    no_args_is_help=True,
    rich_markup_mode="rich",
)


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"[bold cyan]eegvis[/bold cyan] version [bold]{__version__}[/bold]")
        console.print("\nEEG-conditioned image synthesis from small datasets")
        raise typer.Exit()


@app.callback()
def main(
    version: Annotated[
        bool,
        typer.Option(
            "--version",
            "-v",
            help="Show version and exit",
            callback=version_callback,
            is_eager=True,
        ),
    ] = False,
) -> None:
    """
    eegvis - images from EEG recordings with a small-data GAN.

    Pipeline:
    • synth-data builds a paired EEG/image dataset
    • train-encoder learns EEG embeddings with semi-hard triplet mining
    • train-gan trains a hinge-loss conditional GAN with mode seeking and DiffAugment
    • evaluate, generate and ablate score, sample and compare runs

    Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
    """
    pass


# Register subcommands
app.command(name="synth-data")(synth_data_cmd.synth_data_command)
app.command(name="train-encoder")(train_encoder_cmd.train_encoder_command)
app.command(name="train-gan")(train_gan_cmd.train_gan_command)
app.command(name="ablate")(ablate_cmd.ablate_command)
app.command(name="evaluate")(evaluate_cmd.evaluate_command)
app.command(name="generate")(generate_cmd.generate_command)


if __name__ == "__main__":
    app()
