"""Deterministic synthetic paired EEG/image data for desk-scale runs."""

import colorsys
import logging
from typing import Any

import numpy as np
from pydantic import ValidationError

from eegvis.core.config import SyntheticSpec
from eegvis.core.errors import ConfigError
from eegvis.data.dataset import PairedDataset, normalize_signal

logger = logging.getLogger(__name__)

NOISE_STD = 0.1


def class_frequency(label: int) -> float:
    return 2.0 + 3.0 * label


def class_colors(label: int, num_classes: int) -> tuple[np.ndarray, np.ndarray]:
    """Background and shape colours in [-1, 1], hues spread evenly on the circle."""
    hue = label / num_classes
    background = colorsys.hsv_to_rgb(hue, 0.75, 0.9)
    shape = colorsys.hsv_to_rgb((hue + 0.5) % 1.0, 0.9, 0.35)
    to_range = lambda rgb: np.asarray(rgb, dtype=np.float32) * 2.0 - 1.0  # noqa: E731
    return to_range(background), to_range(shape)


def render_class_image(label: int, num_classes: int, size: int, scale: float) -> np.ndarray:
    """Solid background with a centred disc (even labels) or square (odd labels).

    ``scale`` in (0, 1] sets the shape's half-extent relative to the image.
    """
    background, shape = class_colors(label, num_classes)
    image = np.empty((size, size, 3), dtype=np.float32)
    image[:] = background

    coords = np.arange(size, dtype=np.float64) + 0.5 - size / 2.0
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    radius = max(scale * size / 2.0, 0.5)
    if label % 2 == 0:
        mask = xx**2 + yy**2 <= radius**2
    else:
        mask = (np.abs(xx) <= radius) & (np.abs(yy) <= radius)
    image[mask] = shape
    return image


def synthesize_eeg(
    label: int, channels: int, timesteps: int, rng: np.random.Generator
) -> np.ndarray:
    """x[c, t] = sin(2*pi*f_k*t/T + pi*c/C) + noise."""
    t = np.arange(timesteps, dtype=np.float64)
    phases = np.pi * np.arange(channels, dtype=np.float64) / channels
    clean = np.sin(2.0 * np.pi * class_frequency(label) * t[None, :] / timesteps + phases[:, None])
    return clean + rng.normal(0.0, NOISE_STD, size=(channels, timesteps))


def synthesize_dataset(spec: SyntheticSpec | dict[str, Any], seed: int | None = None) -> PairedDataset:
    """Build a class-conditional synthetic dataset.

    Identical spec and seed give a bit-identical dataset. EEG windows are
    stored already normalised.

    Args:
        spec: Generator parameters (a dict is validated into ``SyntheticSpec``)
        seed: Overrides ``spec.seed`` when given

    Raises:
        ConfigError: If the spec is invalid (e.g. image size not a power of two)
    """
    if not isinstance(spec, SyntheticSpec):
        try:
            spec = SyntheticSpec.model_validate(spec)
        except ValidationError as e:
            raise ConfigError(str(e)) from e
    seed = spec.seed if seed is None else seed
    if seed is None:
        raise ConfigError("Synthetic dataset needs a seed")

    k, per_class = spec.num_classes, spec.per_class
    rng = np.random.default_rng(seed)
    n_test = min(per_class - 1, max(1, int(round(per_class * spec.test_fraction))))

    blocks: dict[str, list[tuple[np.ndarray, int, int, np.ndarray]]] = {"train": [], "test": []}
    for label in range(k):
        for j in range(per_class):
            signal = normalize_signal(synthesize_eeg(label, spec.channels, spec.timesteps, rng))
            scale = rng.uniform(0.35, 0.75)
            image = render_class_image(label, k, spec.image_size, scale)
            split = "test" if j >= per_class - n_test else "train"
            blocks[split].append((signal, label, j, image))

    rows = blocks["train"] + blocks["test"]
    n_train = len(blocks["train"])
    eeg = np.stack([r[0] for r in rows]).astype(np.float32)
    labels = np.array([r[1] for r in rows], dtype=np.int64)
    subjects = np.array([r[2] for r in rows], dtype=np.int64)
    images = np.stack([r[3] for r in rows]).astype(np.float32)
    image_split = np.array([0] * n_train + [1] * (len(rows) - n_train), dtype=np.int64)

    logger.debug("Synthesised %d EEG windows (%d train) for %d classes", len(rows), n_train, k)
    return PairedDataset(
        eeg=eeg,
        labels=labels,
        subjects=subjects,
        images=images,
        image_labels=labels.copy(),
        image_split=image_split,
        splits={"train": np.arange(n_train), "test": np.arange(n_train, len(rows))},
        num_classes=k,
        metadata={
            "num_classes": str(k),
            "channels": str(spec.channels),
            "sample_rate_hz": "128",
            "class_names": ",".join(f"class_{i}" for i in range(k)),
            "source": "synthetic",
            "seed": str(seed),
        },
    )
