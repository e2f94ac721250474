"""Shared fixtures: a tiny synthetic dataset and a matching run config."""

from pathlib import Path

import numpy as np
import pytest

from eegvis.core.config import RunConfig, SyntheticSpec
from eegvis.data.dataset import PairedDataset
from eegvis.data.synthetic import synthesize_dataset

TINY_SPEC = {
    "num_classes": 3,
    "per_class": 6,
    "channels": 4,
    "timesteps": 16,
    "image_size": 8,
    "test_fraction": 0.34,
    "seed": 3,
}


def tiny_config(output_dir: Path | None = None, **sections) -> RunConfig:
    """A run config small enough for every stage to finish in seconds."""
    data = {
        "data": {"synthetic": dict(TINY_SPEC)},
        "encoder": {"epochs": 1, "batch_classes": 3, "batch_per_class": 4, "hidden_size": 16},
        "gan": {
            "steps": 2,
            "batch_size": 4,
            "latent_dim": 16,
            "base_channels": 16,
            "cond_channels": 4,
            "log_every": 1,
            "eval_every": 2,
            "sample_every": 2,
            "checkpoint_every": 2,
        },
        "metrics": {"restarts": 1, "max_iter": 50, "splits": 2, "images_per_class": 4, "surrogate_epochs": 1},
    }
    for name, values in sections.items():
        data.setdefault(name, {}).update(values)
    if output_dir is not None:
        data["output_dir"] = str(output_dir)
    return RunConfig.from_dict(data)


def single_class_dataset() -> PairedDataset:
    """One class, two train windows, no test windows."""
    rng = np.random.default_rng(0)
    return PairedDataset(
        eeg=rng.normal(size=(2, 2, 8)).astype(np.float32),
        labels=np.zeros(2, dtype=np.int64),
        subjects=np.zeros(2, dtype=np.int64),
        images=np.zeros((2, 8, 8, 3), dtype=np.float32),
        image_labels=np.zeros(2, dtype=np.int64),
        image_split=np.zeros(2, dtype=np.int64),
        splits={"train": np.arange(2), "test": np.arange(2, 2)},
        num_classes=1,
    )


@pytest.fixture
def tiny_dataset() -> PairedDataset:
    return synthesize_dataset(SyntheticSpec(**TINY_SPEC))


@pytest.fixture
def tiny_run_config(tmp_path: Path) -> RunConfig:
    return tiny_config(tmp_path / "run")
