"""Training loops for the EEG encoder: triplet regime and softmax baseline."""

import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import torch
import torch.nn.functional as F

from eegvis.core.config import EncoderConfig
from eegvis.core.errors import ConfigError, TrainingError
from eegvis.core.metric_log import MetricLog
from eegvis.data.dataset import PairedDataset, normalize_signal
from eegvis.encoder.model import ClassifierHead, EncoderModel, embed
from eegvis.encoder.triplet import mine_triplets, triplet_loss
from eegvis.metrics.clustering import kmeans_accuracy

logger = logging.getLogger(__name__)

TRIPLET_COLUMNS = ["epoch", "loss", "train_kmeans_acc", "test_kmeans_acc"]
SOFTMAX_COLUMNS = TRIPLET_COLUMNS + ["cls_acc"]

ProgressCallback = Callable[[int, int, dict[str, Any]], None]


@dataclass
class EncoderTrainingResult:
    model: EncoderModel
    log: MetricLog
    head: ClassifierHead | None = None


class ClassBalancedSampler:
    """Draws P x Kb batches: P classes, Kb samples from each.

    P and Kb are clamped to what the labels provide.
    """

    def __init__(self, labels: np.ndarray, batch_classes: int, batch_per_class: int, rng: np.random.Generator):
        self.rng = rng
        classes, counts = np.unique(labels, return_counts=True)
        if len(classes) < 2:
            raise ConfigError("Triplet training needs at least two classes in the train split")
        if counts.max() < 2:
            raise ConfigError("Triplet training needs a class with at least two samples")
        self.by_class = {int(c): np.flatnonzero(labels == c) for c in classes}
        self.batch_classes = min(batch_classes, len(classes))
        self.batch_per_class = min(batch_per_class, int(counts.max()))
        if (self.batch_classes, self.batch_per_class) != (batch_classes, batch_per_class):
            logger.warning(
                "Batch spec P=%d, Kb=%d clamped to P=%d, Kb=%d",
                batch_classes, batch_per_class, self.batch_classes, self.batch_per_class,
            )
        self.num_samples = len(labels)

    @property
    def batches_per_epoch(self) -> int:
        return max(1, math.ceil(self.num_samples / (self.batch_classes * self.batch_per_class)))

    def sample(self) -> np.ndarray:
        classes = self.rng.choice(sorted(self.by_class), size=self.batch_classes, replace=False)
        picks = []
        for c in classes:
            pool = self.by_class[int(c)]
            picks.append(self.rng.choice(pool, size=min(self.batch_per_class, len(pool)), replace=False))
        return np.concatenate(picks)

    def epoch(self) -> Iterator[np.ndarray]:
        for _ in range(self.batches_per_epoch):
            yield self.sample()


def _check_finite(value: torch.Tensor, step: int, term: str) -> None:
    if not torch.isfinite(value):
        raise TrainingError(step=step, term=term, value=float(value))


def _kmeans_scores(
    model: EncoderModel, splits: dict[str, tuple[torch.Tensor, np.ndarray]],
    num_classes: int, restarts: int, seed: int,
) -> dict[str, float]:
    scores = {}
    for name, (x, y) in splits.items():
        if len(y) < num_classes:
            scores[f"{name}_kmeans_acc"] = float("nan")
            continue
        emb = embed(model, x).cpu().numpy()
        scores[f"{name}_kmeans_acc"], _ = kmeans_accuracy(emb, y, k=num_classes, restarts=restarts, seed=seed)
    return scores


def _prepare(ds: PairedDataset, device: str) -> dict[str, tuple[torch.Tensor, np.ndarray]]:
    prepared = {}
    for name in ("train", "test"):
        x, y = ds.split(name)
        prepared[name] = (torch.from_numpy(normalize_signal(x)).to(device), y)
    return prepared


def _build_encoder(ds: PairedDataset, cfg: EncoderConfig, seed: int, output_norm: bool, device: str) -> EncoderModel:
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return EncoderModel(ds.num_channels, cfg.hidden_size, output_norm).to(device)


def train_encoder(
    ds: PairedDataset,
    cfg: EncoderConfig,
    seed: int,
    device: str = "cpu",
    kmeans_restarts: int = 10,
    log_path: Path | None = None,
    progress_callback: ProgressCallback | None = None,
) -> EncoderTrainingResult:
    """Train the encoder with online-mined triplets.

    Args:
        ds: Paired dataset (EEG part is used)
        cfg: Encoder settings (margin, P x Kb batches, mining, epochs, lr)
        seed: Seed for initialisation and batch sampling
        device: torch device
        kmeans_restarts: Restarts for the per-epoch k-means evaluation
        log_path: Optional CSV path mirrored by the metric log
        progress_callback: Called as (epoch, epochs, metrics) after each epoch

    Raises:
        ConfigError: If the batch spec is infeasible for the train split
        TrainingError: If the loss becomes non-finite
    """
    data = _prepare(ds, device)
    x_train, y_train = data["train"]
    rng = np.random.default_rng(seed)
    sampler = ClassBalancedSampler(y_train, cfg.batch_classes, cfg.batch_per_class, rng)
    model = _build_encoder(ds, cfg, seed, cfg.output_norm, device)
    log = MetricLog(TRIPLET_COLUMNS, log_path)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    labels_t = torch.from_numpy(y_train)

    step = 0
    for epoch in range(1, cfg.epochs + 1):
        model.train()
        losses = []
        for batch in sampler.epoch():
            step += 1
            idx = torch.from_numpy(batch)
            emb = model(x_train[idx.to(x_train.device)])
            triplets = mine_triplets(emb, labels_t[idx], cfg.margin, cfg.mining)
            loss = triplet_loss(emb, triplets, cfg.margin)
            _check_finite(loss, step, "triplet_loss")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            losses.append(loss.item())

        row = {"epoch": epoch, "loss": float(np.mean(losses))}
        row.update(_kmeans_scores(model, data, ds.num_classes, kmeans_restarts, seed))
        log.append(row)
        logger.info(
            "epoch %d loss %.4f train k-means %.3f test k-means %.3f",
            epoch, row["loss"], row["train_kmeans_acc"], row["test_kmeans_acc"],
        )
        if progress_callback:
            progress_callback(epoch, cfg.epochs, row)

    model.eval()
    return EncoderTrainingResult(model=model, log=log)


def train_classifier_baseline(
    ds: PairedDataset,
    cfg: EncoderConfig,
    seed: int,
    device: str = "cpu",
    kmeans_restarts: int = 10,
    log_path: Path | None = None,
    progress_callback: ProgressCallback | None = None,
) -> EncoderTrainingResult:
    """Train encoder + K-way head with softmax cross-entropy.

    The log adds ``cls_acc`` (test classification accuracy); k-means columns
    score the 128-d features feeding the head.

    Raises:
        ConfigError: If the dataset has fewer than two classes
        TrainingError: If the loss becomes non-finite
    """
    if ds.num_classes < 2:
        raise ConfigError("Softmax baseline needs at least two classes")

    data = _prepare(ds, device)
    x_train, y_train = data["train"]
    x_test, y_test = data["test"]
    model = _build_encoder(ds, cfg, seed, False, device)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed + 1)
        head = ClassifierHead(ds.num_classes).to(device)
    log = MetricLog(SOFTMAX_COLUMNS, log_path)
    optimizer = torch.optim.Adam([*model.parameters(), *head.parameters()], lr=cfg.lr)
    generator = torch.Generator().manual_seed(seed)
    labels_t = torch.from_numpy(y_train).to(device)
    batch_size = cfg.batch_classes * cfg.batch_per_class

    step = 0
    for epoch in range(1, cfg.epochs + 1):
        model.train()
        head.train()
        losses = []
        order = torch.randperm(len(y_train), generator=generator)
        for start in range(0, len(order), batch_size):
            step += 1
            idx = order[start : start + batch_size].to(device)
            logits = head(model(x_train[idx]))
            loss = F.cross_entropy(logits, labels_t[idx])
            _check_finite(loss, step, "cross_entropy")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            losses.append(loss.item())

        row = {"epoch": epoch, "loss": float(np.mean(losses))}
        row.update(_kmeans_scores(model, data, ds.num_classes, kmeans_restarts, seed))
        row["cls_acc"] = classification_accuracy(model, head, x_test, y_test)
        log.append(row)
        logger.info(
            "epoch %d loss %.4f test acc %.3f test k-means %.3f",
            epoch, row["loss"], row["cls_acc"], row["test_kmeans_acc"],
        )
        if progress_callback:
            progress_callback(epoch, cfg.epochs, row)

    model.eval()
    head.eval()
    return EncoderTrainingResult(model=model, log=log, head=head)


@torch.no_grad()
def classification_accuracy(
    model: EncoderModel, head: ClassifierHead, x: torch.Tensor, labels: np.ndarray
) -> float:
    if len(labels) == 0:
        return float("nan")
    head.eval()
    predictions = head(embed(model, x)).argmax(dim=1).cpu().numpy()
    return float(np.mean(predictions == labels))
