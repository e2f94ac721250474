"""train-gan command."""

from typing import Optional

import typer
from typing_extensions import Annotated

from eegvis.cli.options import (
    ConfigOption,
    DataOption,
    OutOption,
    SeedOption,
    VerboseOption,
    prepare_run,
    run_config_path,
)
from eegvis.cli.utils import exit_on_error, print_header, print_info, print_progress, print_success
from eegvis.core.run_dir import GAN_LOG, SAMPLES_DIR, create_run_dir
from eegvis.pipeline import ensure_surrogate, find_encoder, load_run_dataset, run_gan_stage


def train_gan_command(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    data: DataOption = None,
    steps: Annotated[Optional[int], typer.Option("--steps", help="Generator updates")] = None,
    use_ms: Annotated[
        Optional[bool], typer.Option("--ms/--no-ms", help="Mode-seeking regularisation")
    ] = None,
    use_aug: Annotated[
        Optional[bool], typer.Option("--aug/--no-aug", help="Differentiable augmentation")
    ] = None,
    sample_every: Annotated[
        Optional[int], typer.Option("--sample-every", help="Steps between sample sheets")
    ] = None,
    verbose: VerboseOption = False,
) -> None:
    """
    Train the conditional GAN on a trained encoder's embeddings.

    The encoder checkpoint is looked up in the run directory (or, for an
    ablation regime, in the enclosing ablation directory). A surrogate image
    classifier is trained (or reused) so the log can report inception score
    and class consistency.

    Examples:
      eegvis train-gan --out runs/r1
      eegvis train-gan --out runs/r1 --steps 500 --no-ms
      eegvis train-gan --config cfg.json --sample-every 100
    """
    with exit_on_error("GAN training"):
        cfg = prepare_run(
            run_config_path(config, out) if out is not None else config,
            {
                "seed": seed,
                "output_dir": out,
                "data.path": data,
                "gan.steps": steps,
                "gan.use_ms": use_ms,
                "gan.use_aug": use_aug,
                "gan.sample_every": sample_every,
            },
            verbose,
        )
        ds = load_run_dataset(cfg)
        find_encoder(cfg.output_dir)
        run_dir = create_run_dir(cfg.output_dir, cfg)

        print_header("Surrogate classifier")
        classifier, test_acc = ensure_surrogate(cfg, ds, run_dir)
        print_info(f"Surrogate test accuracy: {test_acc:.3f}")

        mode = f"mode seeking {'on' if cfg.gan.use_ms else 'off'}, augmentation {'on' if cfg.gan.use_aug else 'off'}"
        print_header(f"GAN ({mode})")
        keys = ["d_loss", "g_loss", "ms_loss", "is_mean", "class_consistency", "diversity"]
        run_gan_stage(
            cfg, ds, run_dir, classifier,
            progress_callback=lambda i, n, row: print_progress(i, n, row, keys),
        )

    print_success(f"GAN checkpoints in {run_dir} (log: {run_dir / GAN_LOG}, samples: {run_dir / SAMPLES_DIR})")
