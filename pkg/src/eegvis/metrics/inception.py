"""Inception score over classifier posteriors."""

import logging
from collections.abc import Callable

import numpy as np
import torch
from scipy.special import rel_entr

from eegvis.core.errors import ConfigError, InvalidClassifierError

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-6


def effective_splits(batch: int, splits: int, num_classes: int) -> int:
    """Shrink the split count so every split holds at least ``num_classes`` images."""
    if batch < splits:
        raise ConfigError(f"Batch of {batch} images cannot fill {splits} splits")
    if batch < splits * num_classes:
        shrunk = max(1, batch // max(1, num_classes))
        if shrunk < splits:
            logger.warning("Inception score splits reduced from %d to %d", splits, shrunk)
            return shrunk
    return splits


def stratified_splits(probs: np.ndarray, splits: int) -> list[np.ndarray]:
    """Deal rows into ``splits`` parts, balanced by argmax class; sizes differ by at most one."""
    order = np.argsort(probs.argmax(axis=1), kind="stable")
    return [probs[order[i::splits]] for i in range(splits)]


def inception_score_from_probs(probs: np.ndarray, splits: int = 10) -> tuple[float, float]:
    """exp(E_x KL(p(y|x) || p(y))) per split; mean and std across splits.

    p(y) is the marginal of each split. Rows are dealt into splits round-robin
    after a stable sort by predicted class, so every split sees the class mix
    of the whole batch whatever order the images arrive in. KL terms with
    p = 0 contribute 0.

    Raises:
        InvalidClassifierError: If rows are not probability vectors
        ConfigError: If there are fewer rows than splits
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] == 0:
        raise InvalidClassifierError(f"Expected a non-empty N x K probability matrix, got {probs.shape}")
    if np.any(probs < 0) or np.any(np.abs(probs.sum(axis=1) - 1.0) > ROW_SUM_TOLERANCE):
        raise InvalidClassifierError("Classifier rows must be non-negative and sum to 1")
    splits = effective_splits(probs.shape[0], splits, probs.shape[1])

    scores = []
    for part in stratified_splits(probs, splits):
        marginal = part.mean(axis=0, keepdims=True)
        kl = rel_entr(part, marginal).sum(axis=1)
        scores.append(float(np.exp(max(kl.mean(), 0.0))))
    return float(np.mean(scores)), float(np.std(scores))


@torch.no_grad()
def classifier_probs(
    classifier: Callable[[torch.Tensor], torch.Tensor], images: torch.Tensor, batch_size: int = 256
) -> np.ndarray:
    """Run a probability-emitting classifier over N x 3 x H x W images."""
    chunks = [classifier(images[i : i + batch_size]).double().cpu() for i in range(0, images.shape[0], batch_size)]
    return torch.cat(chunks).numpy() if chunks else np.empty((0, 0))


def inception_score(
    images: torch.Tensor, classifier: Callable[[torch.Tensor], torch.Tensor], splits: int = 10
) -> tuple[float, float]:
    """Inception score of ``images`` under ``classifier`` (returns probabilities)."""
    return inception_score_from_probs(classifier_probs(classifier, images), splits)


def per_class_inception_scores(
    images: torch.Tensor,
    labels: np.ndarray,
    classifier: Callable[[torch.Tensor], torch.Tensor],
    splits: int = 10,
    class_names: list[str] | None = None,
) -> list[dict[str, float | str]]:
    """Per-class IS rows plus an ``All`` row (class, is_mean, is_std)."""
    probs = classifier_probs(classifier, images)
    labels = np.asarray(labels)
    rows: list[dict[str, float | str]] = []
    for label in np.unique(labels):
        subset = probs[labels == label]
        mean, std = inception_score_from_probs(subset, min(splits, len(subset)))
        name = class_names[int(label)] if class_names else str(int(label))
        rows.append({"class": name, "is_mean": mean, "is_std": std})
    mean, std = inception_score_from_probs(probs, splits)
    rows.append({"class": "All", "is_mean": mean, "is_std": std})
    return rows
