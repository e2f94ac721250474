"""Model checkpoints stored in the raw-array container format."""

import json
from pathlib import Path
from typing import Any

import numpy as np
import torch
from torch import nn

from eegvis.core.errors import FormatError, IntegrityError
from eegvis.data.container import read_container, write_container


def save_checkpoint(root: Path, model: nn.Module, kind: str, config: dict[str, Any]) -> None:
    """Write every parameter and buffer of ``model`` plus a JSON config echo.

    Args:
        root: Checkpoint directory (replaced atomically)
        model: Module to serialise
        kind: Model kind tag checked on load (e.g. ``"encoder"``)
        config: Constructor arguments needed to rebuild the model
    """
    arrays = {
        name: tensor.detach().cpu().to(torch.float32).numpy()
        for name, tensor in model.state_dict().items()
    }
    metadata = {"kind": kind, "config": json.dumps(config, sort_keys=True)}
    write_container(Path(root), arrays, metadata)


def read_checkpoint_config(root: Path, kind: str) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """Read a checkpoint's arrays and config echo, checking its kind."""
    arrays, metadata = read_container(Path(root))
    if metadata.get("kind") != kind:
        raise FormatError(f"{root} holds a {metadata.get('kind')!r} checkpoint, expected {kind!r}")
    try:
        config = json.loads(metadata["config"])
    except (KeyError, json.JSONDecodeError) as e:
        raise FormatError(f"{root}: missing or corrupt config echo") from e
    return arrays, config


def load_state(model: nn.Module, arrays: dict[str, np.ndarray]) -> nn.Module:
    """Copy checkpoint arrays into ``model`` keeping each tensor's dtype."""
    state = model.state_dict()
    missing = set(state) - set(arrays)
    unexpected = set(arrays) - set(state)
    if missing or unexpected:
        raise IntegrityError(
            f"Checkpoint does not match model (missing {sorted(missing)}, unexpected {sorted(unexpected)})"
        )
    restored = {}
    for name, tensor in state.items():
        array = arrays[name]
        if tuple(array.shape) != tuple(tensor.shape):
            raise IntegrityError(f"{name}: checkpoint shape {array.shape} != model shape {tuple(tensor.shape)}")
        restored[name] = torch.from_numpy(np.array(array)).to(tensor.dtype)
    model.load_state_dict(restored)
    return model
