"""Recurrent EEG feature extractor."""

from pathlib import Path
from typing import Any

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from eegvis.core.checkpoint import load_state, read_checkpoint_config, save_checkpoint
from eegvis.core.errors import ShapeError

EMBEDDING_DIM = 128


class EncoderModel(nn.Module):
    """Single-layer LSTM over time, final hidden state projected to 128-d.

    Input windows are N x C x T; each timestep feeds a C-dim vector.
    """

    def __init__(self, channels: int, hidden_size: int = 128, output_norm: bool = True):
        super().__init__()
        self.channels = channels
        self.hidden_size = hidden_size
        self.output_norm = output_norm
        self.lstm = nn.LSTM(input_size=channels, hidden_size=hidden_size, batch_first=True)
        self.projection = nn.Linear(hidden_size, EMBEDDING_DIM)

    def config(self) -> dict[str, Any]:
        return {
            "channels": self.channels,
            "hidden_size": self.hidden_size,
            "output_norm": self.output_norm,
        }

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 3 or x.shape[1] != self.channels:
            raise ShapeError(
                f"Expected N x {self.channels} x T input, got {tuple(x.shape)}"
            )
        _, (h_n, _) = self.lstm(x.transpose(1, 2))
        features = self.projection(h_n[-1])
        if self.output_norm:
            features = F.normalize(features, p=2, dim=1, eps=1e-12)
        return features


class ClassifierHead(nn.Module):
    """K-way linear head over the 128-d feature (softmax baseline)."""

    def __init__(self, num_classes: int):
        super().__init__()
        self.num_classes = num_classes
        self.linear = nn.Linear(EMBEDDING_DIM, num_classes)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        return self.linear(features)


def _to_tensor(x: np.ndarray | torch.Tensor, like: nn.Module) -> torch.Tensor:
    param = next(like.parameters())
    if isinstance(x, np.ndarray):
        x = torch.from_numpy(np.ascontiguousarray(x))
    return x.to(device=param.device, dtype=param.dtype)


@torch.no_grad()
def embed(model: EncoderModel, x: np.ndarray | torch.Tensor, batch_size: int = 256) -> torch.Tensor:
    """Embed a batch of normalised EEG windows (N x C x T) to N x 128.

    Runs in eval mode without touching the parameters.
    """
    was_training = model.training
    model.eval()
    try:
        x = _to_tensor(x, model)
        if x.ndim != 3:
            raise ShapeError(f"Expected N x C x T input, got {tuple(x.shape)}")
        chunks = [model(x[i : i + batch_size]) for i in range(0, x.shape[0], batch_size)]
        if not chunks:
            return torch.empty(0, EMBEDDING_DIM, dtype=next(model.parameters()).dtype)
        return torch.cat(chunks)
    finally:
        model.train(was_training)


def save_encoder(root: Path, model: EncoderModel, head: ClassifierHead | None = None) -> None:
    """Checkpoint the encoder (and the baseline head, if any)."""
    save_checkpoint(Path(root), model, "encoder", model.config())
    if head is not None:
        save_checkpoint(Path(root) / "head", head, "classifier_head", {"num_classes": head.num_classes})


def load_encoder(root: Path) -> EncoderModel:
    arrays, config = read_checkpoint_config(Path(root), "encoder")
    return load_state(EncoderModel(**config), arrays).eval()
