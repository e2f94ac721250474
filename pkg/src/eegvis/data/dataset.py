"""Paired EEG/image dataset, its container layout and EEG normalisation."""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from eegvis.core.errors import FormatError, IntegrityError, InvalidDataError, WriteError
from eegvis.data.container import read_container, write_container

SPLITS = ("train", "test")
DEFAULT_SAMPLE_RATE_HZ = "128"


@dataclass(frozen=True)
class EEGSample:
    """One EEG window: ``signal`` is C x T float32."""

    signal: np.ndarray
    label: int
    subject: int = 0


def normalize_signal(signal: np.ndarray) -> np.ndarray:
    """Per-channel z-score over the last axis (population std).

    Works on a single C x T window or a batch N x C x T. Constant channels map
    to zeros.

    Raises:
        InvalidDataError: If the signal contains NaN or Inf
    """
    signal = np.asarray(signal)
    if not np.all(np.isfinite(signal)):
        raise InvalidDataError("EEG signal contains NaN or Inf values")

    data = signal.astype(np.float64)
    mean = data.mean(axis=-1, keepdims=True)
    centered = data - mean
    std = np.sqrt((centered**2).mean(axis=-1, keepdims=True))
    constant = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    out = np.where(constant, 0.0, centered / np.where(constant, 1.0, std))
    return out.astype(np.float32)


def normalize_eeg(sample: EEGSample) -> EEGSample:
    """Return ``sample`` with each channel z-scored."""
    return EEGSample(signal=normalize_signal(sample.signal), label=sample.label, subject=sample.subject)


@dataclass(frozen=True)
class PairedDataset:
    """EEG windows paired with per-class image pools.

    ``splits`` partitions the EEG rows into train and test; every window
    belongs to exactly one split. Images are rows of ``images`` and carry
    their own split tags in ``image_split`` (0 = train, 1 = test).

    ``metadata`` always holds ``num_classes``, ``channels`` and
    ``sample_rate_hz``; missing keys are filled in on construction.
    """

    eeg: np.ndarray  # N x C x T
    labels: np.ndarray  # N
    subjects: np.ndarray  # N
    images: np.ndarray  # M x H x W x 3
    image_labels: np.ndarray  # M
    image_split: np.ndarray  # M
    splits: dict[str, np.ndarray]
    num_classes: int
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._validate()
        defaults = {
            "num_classes": str(self.num_classes),
            "channels": str(self.num_channels),
            "sample_rate_hz": DEFAULT_SAMPLE_RATE_HZ,
        }
        metadata = {**defaults, **self.metadata}
        for key in ("num_classes", "channels"):
            if metadata[key] != defaults[key]:
                raise IntegrityError(f"Metadata {key}={metadata[key]} disagrees with the arrays ({defaults[key]})")
        object.__setattr__(self, "metadata", metadata)

    def _validate(self) -> None:
        if self.eeg.ndim != 3 or min(self.eeg.shape) < 1:
            raise IntegrityError(f"EEG array must be N x C x T with C, T >= 1, got {self.eeg.shape}")
        if not np.all(np.isfinite(self.eeg)):
            raise InvalidDataError("EEG array contains NaN or Inf values")
        n = self.eeg.shape[0]
        if self.labels.shape != (n,) or self.subjects.shape != (n,):
            raise IntegrityError("Label and subject arrays must have one entry per EEG sample")
        if self.images.ndim != 4 or self.images.shape[-1] != 3:
            raise IntegrityError(f"Image array must be M x H x W x 3, got {self.images.shape}")
        h, w = self.images.shape[1:3]
        if h != w or h & (h - 1):
            raise IntegrityError(f"Images must be square with power-of-two side, got {h}x{w}")
        if self.images.size and (self.images.min() < -1.0 or self.images.max() > 1.0):
            raise IntegrityError("Image values must lie in [-1, 1]")
        m = self.images.shape[0]
        if self.image_labels.shape != (m,) or self.image_split.shape != (m,):
            raise IntegrityError("Image label and split arrays must have one entry per image")

        for labels in (self.labels, self.image_labels):
            if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
                raise IntegrityError(f"Labels must lie in [0, {self.num_classes})")

        train, test = self.splits["train"], self.splits["test"]
        if np.intersect1d(train, test).size:
            raise IntegrityError("Train and test splits overlap")
        covered = np.sort(np.concatenate([train, test]))
        if not np.array_equal(covered, np.arange(n)):
            raise IntegrityError("Every EEG window must belong to exactly one split")
        if not np.all(np.isin(self.image_split, (0, 1))):
            raise IntegrityError("Image split tags must be 0 (train) or 1 (test)")
        for split_id, name in enumerate(SPLITS):
            eeg_classes = set(np.unique(self.labels[self.splits[name]]).tolist())
            image_classes = set(np.unique(self.image_labels[self.image_split == split_id]).tolist())
            missing = eeg_classes - image_classes
            if missing:
                raise IntegrityError(f"Split {name}: classes {sorted(missing)} have EEG but no images")

    @property
    def num_channels(self) -> int:
        return self.eeg.shape[1]

    @property
    def num_timesteps(self) -> int:
        return self.eeg.shape[2]

    @property
    def image_size(self) -> int:
        return self.images.shape[1]

    def split(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """EEG windows and labels of one split."""
        idx = self.splits[name]
        return self.eeg[idx], self.labels[idx]

    def image_pool(self, name: str, label: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Images (and labels) of one split, optionally restricted to one class."""
        mask = self.image_split == SPLITS.index(name)
        if label is not None:
            mask &= self.image_labels == label
        return self.images[mask], self.image_labels[mask]


# Row positions are stored as f32, which is exact below 2**24.
MAX_ROWS = 2**24


def _split_arrays(ds: PairedDataset) -> dict[str, np.ndarray]:
    if max(len(ds.eeg), len(ds.images)) >= MAX_ROWS:
        raise WriteError(f"Datasets are limited to {MAX_ROWS} EEG windows and images")
    arrays: dict[str, np.ndarray] = {}
    image_rows = np.arange(len(ds.images))
    for split_id, name in enumerate(SPLITS):
        idx = np.asarray(ds.splits[name], dtype=np.int64)
        arrays[f"eeg_{name}"] = ds.eeg[idx]
        arrays[f"labels_{name}"] = ds.labels[idx].astype(np.float32)
        arrays[f"subjects_{name}"] = ds.subjects[idx].astype(np.float32)
        arrays[f"index_{name}"] = idx.astype(np.float32)
        mask = ds.image_split == split_id
        arrays[f"images_{name}"] = ds.images[mask]
        arrays[f"image_labels_{name}"] = ds.image_labels[mask].astype(np.float32)
        arrays[f"image_index_{name}"] = image_rows[mask].astype(np.float32)
    return arrays


def save_dataset(ds: PairedDataset, root: Path) -> None:
    """Write ``ds`` as a container at ``root``.

    Each split is stored as its own block of arrays together with the row
    positions it came from, so loading restores the original row order.

    Raises:
        WriteError: If the directory cannot be written
    """
    write_container(Path(root), _split_arrays(ds), dict(ds.metadata))


def _as_labels(values: np.ndarray, name: str) -> np.ndarray:
    labels = values.astype(np.int64)
    if not np.array_equal(labels, values):
        raise IntegrityError(f"Array {name} must hold integer values")
    return labels


def _scatter(parts: list[np.ndarray], positions: list[np.ndarray], name: str) -> np.ndarray:
    """Place split blocks back at their recorded row positions."""
    order = np.concatenate(positions)
    if not np.array_equal(np.sort(order), np.arange(len(order))):
        raise IntegrityError(f"Row positions of {name} are not a permutation")
    out = np.empty((len(order),) + parts[0].shape[1:], dtype=parts[0].dtype)
    out[order] = np.concatenate(parts)
    return out


def load_dataset(root: Path) -> PairedDataset:
    """Load a dataset container without shuffling.

    Containers that carry ``index_<split>`` and ``image_index_<split>``
    arrays are restored to their saved row order; without them rows are
    laid out train block first.

    Raises:
        FormatError: Missing/corrupt manifest or missing arrays
        IntegrityError: Shape or byte-length mismatch
        UnsupportedDtypeError: Array dtype other than f32
    """
    arrays, metadata = read_container(Path(root))

    def get(name: str, default: np.ndarray | None = None) -> np.ndarray:
        if name in arrays:
            return arrays[name]
        if default is not None:
            return default
        raise FormatError(f"Dataset container lacks array: {name}")

    if "num_classes" not in metadata:
        raise FormatError("Dataset manifest lacks num_classes metadata")
    num_classes = int(metadata["num_classes"])

    eeg_parts, label_parts, subject_parts, positions = [], [], [], []
    image_parts, image_label_parts, image_split_parts, image_positions = [], [], [], []
    offset = image_offset = 0
    for split_id, name in enumerate(SPLITS):
        eeg = get(f"eeg_{name}")
        n = eeg.shape[0]
        eeg_parts.append(eeg)
        label_parts.append(_as_labels(get(f"labels_{name}"), f"labels_{name}"))
        subject_parts.append(
            _as_labels(get(f"subjects_{name}", np.zeros(n, np.float32)), f"subjects_{name}")
        )
        block = np.arange(offset, offset + n, dtype=np.float32)
        positions.append(_as_labels(get(f"index_{name}", block), f"index_{name}"))
        offset += n

        images = get(f"images_{name}")
        m = images.shape[0]
        image_parts.append(images)
        image_label_parts.append(_as_labels(get(f"image_labels_{name}"), f"image_labels_{name}"))
        image_split_parts.append(np.full(m, split_id, dtype=np.int64))
        block = np.arange(image_offset, image_offset + m, dtype=np.float32)
        image_positions.append(_as_labels(get(f"image_index_{name}", block), f"image_index_{name}"))
        image_offset += m

    for parts in (eeg_parts, image_parts):
        if parts[0].shape[1:] != parts[1].shape[1:]:
            raise IntegrityError("Train and test arrays disagree on per-sample shape")
    checks = (
        (label_parts, eeg_parts, "labels"),
        (subject_parts, eeg_parts, "subjects"),
        (positions, eeg_parts, "index"),
        (image_label_parts, image_parts, "image_labels"),
        (image_positions, image_parts, "image_index"),
    )
    for blocks, rows, name in checks:
        if any(len(b) != len(r) for b, r in zip(blocks, rows, strict=True)):
            raise IntegrityError(f"Arrays {name}_<split> must have one entry per row of their split")

    return PairedDataset(
        eeg=_scatter(eeg_parts, positions, "eeg"),
        labels=_scatter(label_parts, positions, "labels"),
        subjects=_scatter(subject_parts, positions, "subjects"),
        images=_scatter(image_parts, image_positions, "images"),
        image_labels=_scatter(image_label_parts, image_positions, "image_labels"),
        image_split=_scatter(image_split_parts, image_positions, "image_split"),
        splits={name: pos for name, pos in zip(SPLITS, positions, strict=True)},
        num_classes=num_classes,
        metadata=metadata,
    )
