"""Sample-level image metrics: class consistency and pairwise diversity."""

from collections.abc import Callable

import numpy as np
import torch

from eegvis.core.errors import ConfigError, InvalidDataError
from eegvis.metrics.inception import classifier_probs


def class_consistency(
    images: torch.Tensor,
    intended_labels: np.ndarray,
    classifier: Callable[[torch.Tensor], torch.Tensor],
) -> float:
    """Fraction of images whose predicted class equals the intended class.

    Raises:
        InvalidDataError: On an empty batch
    """
    intended_labels = np.asarray(intended_labels)
    if images.shape[0] == 0:
        raise InvalidDataError("Class consistency of an empty batch is undefined")
    if images.shape[0] != len(intended_labels):
        raise InvalidDataError("One intended label per image is required")
    predicted = classifier_probs(classifier, images).argmax(axis=1)
    return float(np.mean(predicted == intended_labels))


@torch.no_grad()
def pairwise_diversity(images: torch.Tensor) -> float:
    """Mean over unordered pairs of the mean absolute pixel difference.

    Raises:
        ConfigError: With fewer than two images
    """
    if images.shape[0] < 2:
        raise ConfigError("Pairwise diversity needs at least two images")
    flat = images.detach().reshape(images.shape[0], -1).double()
    return float(torch.pdist(flat, p=1).mean() / flat.shape[1])
