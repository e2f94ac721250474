"""2D export of embeddings for plotting."""

import csv
from pathlib import Path

import numpy as np
from sklearn.decomposition import PCA

from eegvis.core.errors import ConfigError, DegenerateInputError, WriteError


def export_embedding_2d(
    emb: np.ndarray,
    labels: np.ndarray,
    path: Path | None = None,
    method: str = "pca",
) -> np.ndarray:
    """Project embeddings to their top two principal components.

    Axis signs are arbitrary. When ``path`` is given, writes ``x,y,label`` CSV.

    Raises:
        ConfigError: Fewer than three points or unknown method
        DegenerateInputError: All points identical
    """
    if method != "pca":
        raise ConfigError(f"Unknown projection method: {method}")
    emb = np.asarray(emb, dtype=np.float64)
    if emb.shape[0] < 3:
        raise ConfigError("2D export needs at least three points")
    if np.all(emb == emb[0]):
        raise DegenerateInputError("All embeddings are identical")

    components = min(2, emb.shape[1])
    coords = PCA(n_components=components, svd_solver="full").fit_transform(emb)
    if components < 2:
        coords = np.hstack([coords, np.zeros((coords.shape[0], 1))])

    if path is not None:
        try:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(["x", "y", "label"])
                for (x, y), label in zip(coords, np.asarray(labels), strict=True):
                    writer.writerow([repr(float(x)), repr(float(y)), int(label)])
        except OSError as e:
            raise WriteError(f"Cannot write {path}: {e}") from e
    return coords
