"""train-encoder command."""

from typing import Optional

import typer
from typing_extensions import Annotated

from eegvis.cli.options import ConfigOption, DataOption, OutOption, SeedOption, VerboseOption, prepare_run
from eegvis.cli.utils import exit_on_error, print_header, print_info, print_progress, print_success
from eegvis.core.run_dir import ENCODER_DIR, ENCODER_LOG, create_run_dir
from eegvis.pipeline import load_run_dataset, run_encoder_stage


def train_encoder_command(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    data: DataOption = None,
    regime: Annotated[
        Optional[str], typer.Option("--regime", "-r", help="triplet or softmax")
    ] = None,
    epochs: Annotated[Optional[int], typer.Option("--epochs", "-e", help="Training epochs")] = None,
    mining: Annotated[
        Optional[str], typer.Option("--mining", help="semi_hard, hard or all_valid")
    ] = None,
    verbose: VerboseOption = False,
) -> None:
    """
    Train the LSTM EEG encoder.

    The triplet regime learns embeddings with online-mined triplets; the
    softmax regime trains a classifier baseline whose features are scored
    the same way (its log adds a cls_acc column).

    Examples:
      eegvis train-encoder --out runs/r1
      eegvis train-encoder --config cfg.json --regime triplet
      eegvis train-encoder --data data/ --regime softmax --epochs 20
    """
    with exit_on_error("Encoder training"):
        cfg = prepare_run(
            config,
            {
                "seed": seed,
                "output_dir": out,
                "data.path": data,
                "encoder.regime": regime,
                "encoder.epochs": epochs,
                "encoder.mining": mining,
            },
            verbose,
        )
        ds = load_run_dataset(cfg)
        run_dir = create_run_dir(cfg.output_dir, cfg)

        print_header(f"Encoder ({cfg.encoder.regime})")
        print_info(f"{len(ds.splits['train'])} train / {len(ds.splits['test'])} test windows, {ds.num_classes} classes")
        keys = ["loss", "train_kmeans_acc", "test_kmeans_acc", "cls_acc"]
        result = run_encoder_stage(
            cfg, ds, run_dir, progress_callback=lambda i, n, row: print_progress(i, n, row, keys)
        )

    if len(result.log):
        final = result.log.rows[-1]
        print_info(f"Final test k-means accuracy: {final['test_kmeans_acc']:.3f}")
    print_success(f"Encoder saved to {run_dir / ENCODER_DIR} (log: {run_dir / ENCODER_LOG})")
