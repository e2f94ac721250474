"""Run directory structure management."""

from pathlib import Path
from typing import Optional

from eegvis.core.config import RunConfig
from eegvis.core.errors import WriteError

CONFIG_FILE = "config.json"
ENCODER_DIR = "encoder"
ENCODER_LOG = "encoder_log.csv"
SURROGATE_DIR = "surrogate"
SURROGATE_LOG = "surrogate_log.csv"
GENERATOR_DIR = "generator"
DISCRIMINATOR_DIR = "discriminator"
GAN_LOG = "gan_log.csv"
SAMPLES_DIR = "samples"
SCORES_FILE = "scores.json"
PER_CLASS_IS_FILE = "per_class_is.csv"
EMBEDDING_FILE = "embedding_2d.csv"
REPORT_FILE = "report.md"
ABLATION_SUMMARY = "ablation_summary.csv"


def create_run_dir(path: Path, config: RunConfig) -> Path:
    """
    Create a run directory and write the resolved configuration echo.

    Structure:
        <run>/
        ├── config.json             # Resolved configuration
        ├── encoder/                # Encoder checkpoint (train-encoder)
        ├── encoder_log.csv
        ├── surrogate/              # Surrogate image classifier (evaluate, ablate)
        ├── surrogate_log.csv
        ├── generator/              # GAN checkpoints (train-gan)
        ├── discriminator/
        ├── gan_log.csv
        ├── samples/                # step_XXXXXX.png sample sheets
        ├── scores.json             # evaluate outputs
        ├── per_class_is.csv
        ├── embedding_2d.csv
        └── report.md

    Returns:
        The run directory
    """
    try:
        path.mkdir(parents=True, exist_ok=True)
        config.save_to_file(path / CONFIG_FILE)
    except OSError as e:
        raise WriteError(f"Cannot create run directory {path}: {e}") from e
    return path


def find_artifact(name: str, run_dir: Path) -> Optional[Path]:
    """
    Find a run artifact (file or checkpoint directory) for ``run_dir``.

    Only the run directory itself is searched, plus its parent when the
    parent is an ablation directory (it holds ``ablation_summary.csv``).
    Ablation regimes share the encoder and surrogate trained there.

    Args:
        name: Artifact name relative to a run directory (e.g. ``"encoder"``)
        run_dir: Run directory to search from

    Returns:
        Path to the artifact or None if not found
    """
    run_dir = run_dir.resolve()
    candidates = [run_dir]
    if (run_dir.parent / ABLATION_SUMMARY).exists():
        candidates.append(run_dir.parent)

    for directory in candidates:
        candidate = directory / name
        if candidate.exists():
            return candidate

    return None
