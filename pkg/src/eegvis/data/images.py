"""Conversions between image layouts and PNG sheet export."""

from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision.utils import make_grid

from eegvis.core.errors import WriteError


def to_channels_first(images: np.ndarray) -> torch.Tensor:
    """N x H x W x 3 array -> N x 3 x H x W float tensor."""
    return torch.from_numpy(np.ascontiguousarray(images)).permute(0, 3, 1, 2).contiguous()


def to_channels_last(images: torch.Tensor) -> np.ndarray:
    """N x 3 x H x W tensor -> N x H x W x 3 float32 array."""
    return images.detach().cpu().permute(0, 2, 3, 1).numpy().astype(np.float32)


def to_uint8(images: torch.Tensor) -> torch.Tensor:
    """Map [-1, 1] to 8-bit: round((v + 1) * 127.5) clamped to [0, 255]."""
    return torch.round((images.detach().double() + 1.0) * 127.5).clamp(0, 255).to(torch.uint8)


def export_image_grid(images: torch.Tensor | np.ndarray, path: Path, nrow: int) -> Path:
    """Write a PNG sheet with ``nrow`` images per row.

    Args:
        images: N x 3 x H x W tensor (or N x H x W x 3 array) in [-1, 1]
        path: Destination PNG file
        nrow: Images per grid row

    Returns:
        The written path
    """
    if isinstance(images, np.ndarray):
        images = to_channels_first(images)
    grid = make_grid(images.detach().cpu().float(), nrow=max(1, nrow), padding=2, pad_value=-1.0)
    pixels = to_uint8(grid).permute(1, 2, 0).contiguous().numpy()

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(pixels).save(path, format="PNG")
    except OSError as e:
        raise WriteError(f"Cannot write image grid {path}: {e}") from e
    return path
