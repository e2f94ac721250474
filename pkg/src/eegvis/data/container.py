"""Manifest-plus-raw-array container format.

A container is a directory holding ``manifest.json`` and one raw binary file
per array (32-bit little-endian floats, C order). It backs datasets, model
checkpoints and the surrogate classifier alike.
"""

import json
import math
import os
import shutil
import tempfile
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from eegvis.core.errors import FormatError, IntegrityError, UnsupportedDtypeError, WriteError

MANIFEST_NAME = "manifest.json"
CONTAINER_VERSION = 1
_DTYPE = np.dtype("<f4")


class ArrayEntry(BaseModel):
    """One array referenced by a manifest."""

    model_config = ConfigDict(extra="forbid")

    name: str
    dtype: str = "f32"
    shape: list[int]
    file: str
    byte_order: str = "little"

    @field_validator("shape")
    @classmethod
    def validate_shape(cls, v: list[int]) -> list[int]:
        if any(d < 0 for d in v):
            raise ValueError(f"Negative dimension in shape {v}")
        return v

    @property
    def nbytes(self) -> int:
        return 4 * math.prod(self.shape)


class ContainerManifest(BaseModel):
    """Top-level manifest document."""

    model_config = ConfigDict(extra="forbid")

    version: int = CONTAINER_VERSION
    arrays: list[ArrayEntry] = Field(default_factory=list)
    metadata: dict[str, str] = Field(default_factory=dict)

    @field_validator("arrays")
    @classmethod
    def validate_unique_names(cls, v: list[ArrayEntry]) -> list[ArrayEntry]:
        names = [entry.name for entry in v]
        if len(names) != len(set(names)):
            raise ValueError("Array names must be unique")
        return v

    def entry(self, name: str) -> ArrayEntry:
        for entry in self.arrays:
            if entry.name == name:
                return entry
        raise FormatError(f"Array not declared in manifest: {name}")


def read_manifest(root: Path) -> ContainerManifest:
    """Parse and validate ``root/manifest.json``."""
    path = root / MANIFEST_NAME
    if not path.is_file():
        raise FormatError(f"Manifest not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        manifest = ContainerManifest.model_validate(data)
    except (json.JSONDecodeError, UnicodeDecodeError, ValidationError) as e:
        raise FormatError(f"Corrupt manifest {path}: {e}") from e

    for entry in manifest.arrays:
        if entry.dtype != "f32" or entry.byte_order != "little":
            raise UnsupportedDtypeError(
                f"Array {entry.name}: unsupported dtype {entry.dtype}/{entry.byte_order}"
            )
    return manifest


def read_array(root: Path, entry: ArrayEntry) -> np.ndarray:
    """Read one array, checking its byte length against the declared shape."""
    path = root / entry.file
    if not path.is_file():
        raise IntegrityError(f"Array file missing: {path}")
    size = path.stat().st_size
    if size != entry.nbytes:
        raise IntegrityError(
            f"Array {entry.name}: shape {entry.shape} needs {entry.nbytes} bytes, file has {size}"
        )
    data = np.fromfile(path, dtype=_DTYPE)
    return data.reshape(entry.shape).astype(np.float32, copy=False)


def read_container(root: Path) -> tuple[dict[str, np.ndarray], dict[str, str]]:
    """Read every array of a container.

    Returns:
        (arrays by name, metadata map)
    """
    root = Path(root)
    manifest = read_manifest(root)
    arrays = {entry.name: read_array(root, entry) for entry in manifest.arrays}
    return arrays, dict(manifest.metadata)


def _file_name(name: str) -> str:
    safe = "".join(c if c.isalnum() or c in "._-" else "_" for c in name)
    return f"{safe}.f32"


def write_container(
    root: Path,
    arrays: dict[str, np.ndarray],
    metadata: dict[str, str] | None = None,
) -> ContainerManifest:
    """Write arrays and metadata as a container at ``root``.

    The container is assembled in a sibling temporary directory and renamed
    into place, so readers never observe a half-written container.
    """
    root = Path(root)
    entries = []
    for name, array in arrays.items():
        entries.append(
            ArrayEntry(name=name, shape=list(np.shape(array)), file=_file_name(name))
        )
    manifest = ContainerManifest(arrays=entries, metadata=dict(metadata or {}))

    try:
        root.parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=f".{root.name}.", dir=root.parent))
        try:
            for entry in entries:
                data = np.ascontiguousarray(arrays[entry.name], dtype=_DTYPE)
                data.tofile(staging / entry.file)
            (staging / MANIFEST_NAME).write_text(
                manifest.model_dump_json(indent=2), encoding="utf-8"
            )
            if root.exists():
                backup = root.with_name(f".{root.name}.old")
                if backup.exists():
                    shutil.rmtree(backup)
                os.replace(root, backup)
                os.replace(staging, root)
                shutil.rmtree(backup)
            else:
                os.replace(staging, root)
        finally:
            if staging.exists():
                shutil.rmtree(staging, ignore_errors=True)
    except OSError as e:
        raise WriteError(f"Cannot write container {root}: {e}") from e

    return manifest
