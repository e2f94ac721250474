"""Differentiable augmentation applied to every image the discriminator sees."""

import math
from dataclasses import dataclass, replace

import torch
import torch.nn.functional as F

from eegvis.core.config import AugmentConfig
from eegvis.core.seeding import torch_generator

OPS = ("translation", "brightness", "saturation", "contrast")


@dataclass(frozen=True)
class AugmentationPolicy:
    """Enabled ops and their parameter ranges."""

    ops: tuple[str, ...] = OPS
    translation_ratio: float = 0.125
    brightness: float = 0.5
    saturation: tuple[float, float] = (0.0, 2.0)
    contrast: tuple[float, float] = (0.5, 1.5)

    @classmethod
    def from_config(cls, cfg: AugmentConfig) -> "AugmentationPolicy":
        return cls(
            ops=tuple(cfg.ops),
            translation_ratio=cfg.translation_ratio,
            brightness=cfg.brightness,
            saturation=tuple(cfg.saturation),
            contrast=tuple(cfg.contrast),
        )

    @classmethod
    def identity(cls) -> "AugmentationPolicy":
        """Every op enabled at zero magnitude."""
        return cls(translation_ratio=0.0, brightness=0.0, saturation=(1.0, 1.0), contrast=(1.0, 1.0))

    def max_shift(self, size: int) -> int:
        return int(math.floor(self.translation_ratio * size))

    def active(self, op: str, size: int) -> bool:
        """False for disabled ops and ops whose range collapses to the identity."""
        if op not in self.ops:
            return False
        if op == "translation":
            return self.max_shift(size) > 0
        if op == "brightness":
            return self.brightness > 0
        low, high = getattr(self, op)
        return not (low == 1.0 and high == 1.0)


@dataclass
class AugmentParams:
    """Per-sample parameters drawn for one call; ``None`` marks a skipped op."""

    shift: torch.Tensor | None = None  # N x 2 integer (dy, dx)
    brightness: torch.Tensor | None = None  # N
    saturation: torch.Tensor | None = None  # N
    contrast: torch.Tensor | None = None  # N

    def to(self, device: torch.device | str) -> "AugmentParams":
        moved = {
            name: None if value is None else value.to(device)
            for name, value in (
                ("shift", self.shift),
                ("brightness", self.brightness),
                ("saturation", self.saturation),
                ("contrast", self.contrast),
            )
        }
        return replace(self, **moved)


def translate(x: torch.Tensor, shift: torch.Tensor) -> torch.Tensor:
    """Shift each image by integer (dy, dx) pixels, filling with zeros.

    Output pixel (i, j) takes input pixel (i - dy, j - dx); pixels that arrive
    from outside the image are 0. The Jacobian is the identity on surviving
    pixels.
    """
    n, _, h, w = x.shape
    pad = int(shift.abs().max().item()) if shift.numel() else 0
    if pad == 0:
        return x
    shift = shift.to(device=x.device, dtype=torch.long)
    grid_b, grid_y, grid_x = torch.meshgrid(
        torch.arange(n, device=x.device),
        torch.arange(h, device=x.device),
        torch.arange(w, device=x.device),
        indexing="ij",
    )
    rows = grid_y - shift[:, 0].view(-1, 1, 1) + pad
    cols = grid_x - shift[:, 1].view(-1, 1, 1) + pad
    x_pad = F.pad(x, [pad, pad, pad, pad])
    return x_pad.permute(0, 2, 3, 1)[grid_b, rows, cols].permute(0, 3, 1, 2).contiguous()


def adjust_brightness(x: torch.Tensor, delta: torch.Tensor) -> torch.Tensor:
    return x + delta.to(x).view(-1, 1, 1, 1)


def adjust_saturation(x: torch.Tensor, factor: torch.Tensor) -> torch.Tensor:
    """Interpolate each pixel toward its gray value (channel mean)."""
    gray = x.mean(dim=1, keepdim=True)
    return (x - gray) * factor.to(x).view(-1, 1, 1, 1) + gray


def adjust_contrast(x: torch.Tensor, factor: torch.Tensor) -> torch.Tensor:
    """Interpolate each image toward its mean value."""
    mean = x.mean(dim=(1, 2, 3), keepdim=True)
    return (x - mean) * factor.to(x).view(-1, 1, 1, 1) + mean


class DiffAugment:
    """Seeded differentiable augmentation block T.

    Each call draws fresh per-sample parameters from the policy ranges
    (unless ``params`` replays an earlier draw) and returns them with the
    augmented batch. Color ops run first and are followed by clipping to
    [-1, 1]; translation runs last. Zero-magnitude ops are skipped, so the
    identity policy returns its input unchanged.
    """

    def __init__(self, policy: AugmentationPolicy, seed: int):
        self.policy = policy
        self.generator = torch_generator(seed)

    def _uniform(self, n: int, low: float, high: float) -> torch.Tensor:
        return low + (high - low) * torch.rand(n, generator=self.generator, dtype=torch.float64)

    def draw(self, n: int, size: int) -> AugmentParams:
        """Draw parameters for ``n`` images of side ``size`` (CPU tensors)."""
        policy = self.policy
        params = AugmentParams()
        if policy.active("brightness", size):
            params.brightness = self._uniform(n, -policy.brightness, policy.brightness)
        if policy.active("saturation", size):
            params.saturation = self._uniform(n, *policy.saturation)
        if policy.active("contrast", size):
            params.contrast = self._uniform(n, *policy.contrast)
        if policy.active("translation", size):
            limit = policy.max_shift(size)
            params.shift = torch.randint(-limit, limit + 1, (n, 2), generator=self.generator)
        return params

    def __call__(self, x: torch.Tensor, params: AugmentParams | None = None) -> tuple[torch.Tensor, AugmentParams]:
        if params is None:
            params = self.draw(x.shape[0], x.shape[2])
        params = params.to(x.device)

        color = False
        if params.brightness is not None:
            x = adjust_brightness(x, params.brightness)
            color = True
        if params.saturation is not None:
            x = adjust_saturation(x, params.saturation)
            color = True
        if params.contrast is not None:
            x = adjust_contrast(x, params.contrast)
            color = True
        if color:
            x = x.clamp(-1.0, 1.0)
        if params.shift is not None:
            x = translate(x, params.shift)
        return x, params
