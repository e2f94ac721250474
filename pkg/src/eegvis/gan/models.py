"""Conditional DCGAN generator and discriminator."""

import logging
import math
from pathlib import Path
from typing import Any

import torch
from torch import nn

from eegvis.core.checkpoint import load_state, read_checkpoint_config, save_checkpoint
from eegvis.core.config import is_power_of_two
from eegvis.core.errors import ConfigError, ShapeError
from eegvis.core.seeding import torch_generator

logger = logging.getLogger(__name__)

CONDITION_DIM = 128


def _num_blocks(image_size: int) -> int:
    if not is_power_of_two(image_size) or image_size < 8:
        raise ConfigError(f"image_size must be a power of two >= 8, got {image_size}")
    return int(math.log2(image_size // 4))


class Generator(nn.Module):
    """[z || psi] -> 4x4xF0 -> transpose-conv blocks (channels halving) -> tanh image."""

    def __init__(
        self,
        image_size: int = 32,
        latent_dim: int = 128,
        cond_dim: int = CONDITION_DIM,
        base_channels: int = 256,
    ):
        super().__init__()
        self.image_size = image_size
        self.latent_dim = latent_dim
        self.cond_dim = cond_dim
        self.base_channels = base_channels

        self.fc = nn.Sequential(
            nn.Linear(latent_dim + cond_dim, 4 * 4 * base_channels, bias=False),
            nn.BatchNorm1d(4 * 4 * base_channels),
            nn.ReLU(inplace=True),
        )
        blocks = []
        channels = base_channels
        for _ in range(_num_blocks(image_size)):
            out = max(channels // 2, 8)
            blocks += [
                nn.ConvTranspose2d(channels, out, 4, stride=2, padding=1, bias=False),
                nn.BatchNorm2d(out),
                nn.ReLU(inplace=True),
            ]
            channels = out
        self.blocks = nn.Sequential(*blocks)
        self.head = nn.Sequential(nn.Conv2d(channels, 3, 3, stride=1, padding=1), nn.Tanh())

    def config(self) -> dict[str, Any]:
        return {
            "image_size": self.image_size,
            "latent_dim": self.latent_dim,
            "cond_dim": self.cond_dim,
            "base_channels": self.base_channels,
        }

    def forward(self, z: torch.Tensor, psi: torch.Tensor) -> torch.Tensor:
        if z.ndim != 2 or psi.ndim != 2 or z.shape[0] != psi.shape[0]:
            raise ShapeError(f"z {tuple(z.shape)} and psi {tuple(psi.shape)} must be N x d with equal N")
        if z.shape[1] != self.latent_dim or psi.shape[1] != self.cond_dim:
            raise ShapeError(
                f"Expected z dim {self.latent_dim} and psi dim {self.cond_dim}, "
                f"got {z.shape[1]} and {psi.shape[1]}"
            )
        h = self.fc(torch.cat([z, psi], dim=1))
        h = h.view(-1, self.base_channels, 4, 4)
        return self.head(self.blocks(h))


class Discriminator(nn.Module):
    """Strided-conv stack H -> 4 with psi broadcast-concatenated at 8x8.

    Leaky ReLU (0.2) throughout, batch norm on every block but the first,
    linear head to one unconstrained score.
    """

    def __init__(
        self,
        image_size: int = 32,
        cond_dim: int = CONDITION_DIM,
        base_channels: int = 256,
        cond_channels: int = 16,
    ):
        super().__init__()
        self.image_size = image_size
        self.cond_dim = cond_dim
        self.base_channels = base_channels
        self.cond_channels = cond_channels

        n = _num_blocks(image_size)
        widths = [max(base_channels // 2 ** (n - 1 - i), 8) for i in range(n)]
        self.cond_proj = nn.Linear(cond_dim, cond_channels)

        self.down = nn.ModuleList()
        in_channels = 3
        for i, out in enumerate(widths):
            if i == n - 1:
                in_channels += cond_channels
            layers: list[nn.Module] = [nn.Conv2d(in_channels, out, 4, stride=2, padding=1, bias=i == 0)]
            if i > 0:
                layers.append(nn.BatchNorm2d(out))
            layers.append(nn.LeakyReLU(0.2, inplace=True))
            self.down.append(nn.Sequential(*layers))
            in_channels = out
        self.head = nn.Linear(in_channels * 4 * 4, 1)

    def config(self) -> dict[str, Any]:
        return {
            "image_size": self.image_size,
            "cond_dim": self.cond_dim,
            "base_channels": self.base_channels,
            "cond_channels": self.cond_channels,
        }

    def forward(self, x: torch.Tensor, psi: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1:] != (3, self.image_size, self.image_size):
            raise ShapeError(f"Expected N x 3 x {self.image_size} x {self.image_size}, got {tuple(x.shape)}")
        if psi.shape != (x.shape[0], self.cond_dim):
            raise ShapeError(f"Expected psi of shape ({x.shape[0]}, {self.cond_dim}), got {tuple(psi.shape)}")
        h = x
        for i, block in enumerate(self.down):
            if i == len(self.down) - 1:
                c = self.cond_proj(psi)[:, :, None, None].expand(-1, -1, h.shape[2], h.shape[3])
                h = torch.cat([h, c], dim=1)
            h = block(h)
        return self.head(h.flatten(1)).squeeze(1)


class LatentSampler:
    """Seeded standard-normal latent vectors."""

    def __init__(self, dim: int = 128, seed: int = 0):
        self.dim = dim
        self.generator = torch_generator(seed)

    def sample(self, n: int) -> torch.Tensor:
        return torch.randn(n, self.dim, generator=self.generator)

    def sample_pair(self, n: int) -> tuple[torch.Tensor, torch.Tensor]:
        """Two latent batches with no identical rows between them."""
        z1, z2 = self.sample(n), self.sample(n)
        equal = (z1 == z2).all(dim=1)
        while equal.any():
            logger.warning("Resampling %d identical latent rows", int(equal.sum()))
            z2[equal] = self.sample(int(equal.sum()))
            equal = (z1 == z2).all(dim=1)
        return z1, z2


def init_weights(module: nn.Module) -> None:
    """N(0, 0.02) convolution/linear weights, N(1, 0.02) batch-norm scales."""
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
        nn.init.normal_(module.weight, 0.0, 0.02)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
    elif isinstance(module, (nn.BatchNorm1d, nn.BatchNorm2d)):
        nn.init.normal_(module.weight, 1.0, 0.02)
        nn.init.zeros_(module.bias)


def generate(generator: Generator, z: torch.Tensor, psi: torch.Tensor) -> torch.Tensor:
    """Images N x 3 x H x W in [-1, 1] for latents ``z`` and conditions ``psi``.

    Uses eval-mode batch norm, so each output row depends only on its own
    (z, psi) row.
    """
    was_training = generator.training
    generator.eval()
    try:
        with torch.no_grad():
            return generator(z, psi)
    finally:
        generator.train(was_training)


def save_generator(root: Path, generator: Generator) -> None:
    save_checkpoint(Path(root), generator, "generator", generator.config())


def save_discriminator(root: Path, discriminator: Discriminator) -> None:
    save_checkpoint(Path(root), discriminator, "discriminator", discriminator.config())


def load_generator(root: Path) -> Generator:
    arrays, config = read_checkpoint_config(Path(root), "generator")
    return load_state(Generator(**config), arrays).eval()


def load_discriminator(root: Path) -> Discriminator:
    arrays, config = read_checkpoint_config(Path(root), "discriminator")
    return load_state(Discriminator(**config), arrays).eval()
