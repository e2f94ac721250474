"""k-means clustering accuracy with optimal cluster-to-class matching."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import KMeans

from eegvis.core.errors import ConfigError


@dataclass(frozen=True)
class ContingencyTable:
    """k x K counts: rows are clusters, columns are true classes."""

    counts: np.ndarray

    @classmethod
    def from_assignments(cls, clusters: np.ndarray, labels: np.ndarray, k: int, num_classes: int) -> "ContingencyTable":
        counts = np.zeros((k, num_classes), dtype=np.int64)
        np.add.at(counts, (clusters.astype(np.int64), labels.astype(np.int64)), 1)
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def best_matching(counts: np.ndarray) -> tuple[int, list[tuple[int, int]]]:
    """Maximum-weight one-to-one cluster -> class matching (Hungarian method).

    Returns:
        (matched count, list of (cluster, class) pairs)
    """
    rows, cols = linear_sum_assignment(counts, maximize=True)
    matched = int(counts[rows, cols].sum())
    return matched, list(zip(rows.tolist(), cols.tolist(), strict=True))


def kmeans_accuracy(
    emb: np.ndarray,
    labels: np.ndarray,
    k: int,
    restarts: int = 10,
    seed: int = 0,
    max_iter: int = 300,
) -> tuple[float, ContingencyTable]:
    """Cluster ``emb`` with k-means and score the best cluster/class matching.

    k-means++ initialisation, ``restarts`` runs keeping the lowest inertia;
    each run stops once assignments no longer change.

    Raises:
        ConfigError: If k < 1 or there are fewer samples than clusters
    """
    emb = np.asarray(emb, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    if k < 1:
        raise ConfigError(f"Cluster count must be >= 1, got {k}")
    if emb.shape[0] < k:
        raise ConfigError(f"Need at least {k} samples for k-means, got {emb.shape[0]}")

    kmeans = KMeans(
        n_clusters=k, init="k-means++", n_init=restarts, max_iter=max_iter, tol=0.0, random_state=seed % 2**32
    )
    clusters = kmeans.fit_predict(emb)
    num_classes = int(labels.max()) + 1 if labels.size else 0
    table = ContingencyTable.from_assignments(clusters, labels, k, num_classes)
    matched, _ = best_matching(table.counts)
    return matched / table.total, table
