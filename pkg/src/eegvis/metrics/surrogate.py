"""Small image classifier standing in for the inception network."""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from eegvis.core.checkpoint import load_state, read_checkpoint_config, save_checkpoint
from eegvis.core.errors import ConfigError, TrainingError
from eegvis.core.metric_log import MetricLog
from eegvis.data.dataset import PairedDataset
from eegvis.data.images import to_channels_first

logger = logging.getLogger(__name__)

SURROGATE_COLUMNS = ["epoch", "loss", "train_acc", "test_acc"]


class SurrogateClassifier(nn.Module):
    """Two strided convolutions, 4x4 pooling, linear K-way head.

    The head starts at zero, so an untrained classifier predicts exactly the
    uniform distribution.
    """

    def __init__(self, num_classes: int, width: int = 32):
        super().__init__()
        self.num_classes = num_classes
        self.width = width
        self.features = nn.Sequential(
            nn.Conv2d(3, width // 2, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(width // 2, width, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.AdaptiveAvgPool2d(4),
            nn.Flatten(),
        )
        self.head = nn.Linear(width * 16, num_classes)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def config(self) -> dict[str, Any]:
        return {"num_classes": self.num_classes, "width": self.width}

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(images))

    @torch.no_grad()
    def probabilities(self, images: torch.Tensor) -> torch.Tensor:
        """Class posteriors for N x 3 x H x W images in [-1, 1]."""
        self.eval()
        param = next(self.parameters())
        return F.softmax(self(images.to(device=param.device, dtype=param.dtype)), dim=1)


@dataclass
class SurrogateTrainingResult:
    classifier: SurrogateClassifier
    test_accuracy: float
    log: MetricLog


@torch.no_grad()
def accuracy(classifier: Callable[[torch.Tensor], torch.Tensor], images: torch.Tensor, labels: np.ndarray) -> float:
    if len(labels) == 0:
        return float("nan")
    predicted = classifier(images).argmax(dim=1).cpu().numpy()
    return float(np.mean(predicted == labels))


def train_surrogate_classifier(
    ds: PairedDataset,
    seed: int,
    epochs: int = 30,
    lr: float = 1e-3,
    batch_size: int = 64,
    device: str = "cpu",
    log_path: Path | None = None,
) -> SurrogateTrainingResult:
    """Train the surrogate on the real train image pool; score the test pool.

    Raises:
        ConfigError: If the dataset has fewer than two classes
        TrainingError: If the loss becomes non-finite
    """
    if ds.num_classes < 2:
        raise ConfigError("Surrogate classifier needs at least two classes")

    train_images, train_labels = ds.image_pool("train")
    test_images, test_labels = ds.image_pool("test")
    x_train = to_channels_first(train_images).to(device)
    x_test = to_channels_first(test_images).to(device)
    y_train = torch.from_numpy(train_labels).to(device)

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        classifier = SurrogateClassifier(ds.num_classes).to(device)
    optimizer = torch.optim.Adam(classifier.parameters(), lr=lr)
    generator = torch.Generator().manual_seed(seed)
    log = MetricLog(SURROGATE_COLUMNS, log_path)

    step = 0
    for epoch in range(1, epochs + 1):
        classifier.train()
        losses = []
        order = torch.randperm(len(y_train), generator=generator)
        for start in range(0, len(order), batch_size):
            step += 1
            idx = order[start : start + batch_size].to(device)
            loss = F.cross_entropy(classifier(x_train[idx]), y_train[idx])
            if not torch.isfinite(loss):
                raise TrainingError(step=step, term="surrogate_cross_entropy", value=float(loss))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            losses.append(loss.item())
        classifier.eval()
        row = {
            "epoch": epoch,
            "loss": float(np.mean(losses)),
            "train_acc": accuracy(classifier.probabilities, x_train, train_labels),
            "test_acc": accuracy(classifier.probabilities, x_test, test_labels),
        }
        log.append(row)
        logger.debug("surrogate epoch %d loss %.4f test acc %.3f", epoch, row["loss"], row["test_acc"])

    classifier.eval()
    test_accuracy = accuracy(classifier.probabilities, x_test, test_labels)
    logger.info("Surrogate classifier test accuracy %.3f", test_accuracy)
    return SurrogateTrainingResult(classifier=classifier, test_accuracy=test_accuracy, log=log)


def save_surrogate(root: Path, classifier: SurrogateClassifier) -> None:
    save_checkpoint(Path(root), classifier, "surrogate", classifier.config())


def load_surrogate(root: Path) -> SurrogateClassifier:
    arrays, config = read_checkpoint_config(Path(root), "surrogate")
    return load_state(SurrogateClassifier(**config), arrays).eval()
