"""Conditional GAN training on frozen EEG embeddings."""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import torch

from eegvis.core.config import GanConfig
from eegvis.core.errors import ConfigError, TrainingError
from eegvis.core.metric_log import MetricLog
from eegvis.core.seeding import derive_seed, numpy_rng
from eegvis.data.dataset import PairedDataset, normalize_signal
from eegvis.data.images import export_image_grid, to_channels_first
from eegvis.encoder.model import EncoderModel, embed
from eegvis.gan.augment import AugmentationPolicy, DiffAugment
from eegvis.gan.losses import d_loss_hinge, g_loss_hinge, mode_seeking_from_images
from eegvis.gan.models import (
    Discriminator,
    Generator,
    LatentSampler,
    generate,
    init_weights,
    save_discriminator,
    save_generator,
)
from eegvis.metrics.report import score_samples

logger = logging.getLogger(__name__)

GAN_COLUMNS = ["step", "d_loss", "g_loss", "ms_loss", "is_mean", "is_std", "class_consistency", "diversity"]
SAMPLES_PER_CLASS_IN_SHEET = 8

ProgressCallback = Callable[[int, int, dict[str, Any]], None]
Classifier = Callable[[torch.Tensor], torch.Tensor]


@dataclass
class GanBatch:
    """One step's inputs: real images with their conditions, and fake conditions with latents."""

    real: torch.Tensor  # N x 3 x H x W
    psi_real: torch.Tensor  # N x 128
    psi_fake: torch.Tensor  # N x 128
    fake_labels: np.ndarray  # N
    z1: torch.Tensor  # N x latent_dim
    z2: torch.Tensor | None = None  # second latent for the mode-seeking pair


@dataclass
class GanTrainingResult:
    generator: Generator
    discriminator: Discriminator
    log: MetricLog


class ConditionBank:
    """Frozen-encoder embeddings of one split, grouped by class."""

    def __init__(self, encoder: EncoderModel, eeg: np.ndarray, labels: np.ndarray):
        self.embeddings = embed(encoder, normalize_signal(eeg)).detach().float().cpu()
        self.labels = np.asarray(labels)
        self.by_class = {int(c): np.flatnonzero(self.labels == c) for c in np.unique(self.labels)}

    @property
    def classes(self) -> list[int]:
        return sorted(self.by_class)

    def __len__(self) -> int:
        return len(self.labels)

    def sample(self, n: int, rng: np.random.Generator) -> tuple[torch.Tensor, np.ndarray]:
        idx = rng.integers(0, len(self.labels), size=n)
        return self.embeddings[torch.from_numpy(idx)], self.labels[idx]

    def for_labels(self, labels: np.ndarray, rng: np.random.Generator) -> torch.Tensor:
        """One embedding of the matching class per requested label."""
        idx = np.array([rng.choice(self.by_class[int(label)]) for label in labels], dtype=np.int64)
        return self.embeddings[torch.from_numpy(idx)]


class GanTrainer:
    """Owns G, D, their optimizers and the seeded streams of one GAN run.

    The encoder is used once, at construction, to embed every EEG window;
    its parameters are never touched afterwards.
    """

    def __init__(
        self,
        ds: PairedDataset,
        encoder: EncoderModel,
        cfg: GanConfig,
        seed: int,
        device: str = "cpu",
    ):
        if ds.splits["train"].size == 0:
            raise ConfigError("GAN training needs a non-empty train split")
        self.cfg = cfg
        self.device = device
        self.num_classes = ds.num_classes

        encoder.requires_grad_(False)
        eeg, labels = ds.split("train")
        self.conditions = ConditionBank(encoder, eeg, labels)
        test_eeg, test_labels = ds.split("test")
        held_out = ConditionBank(encoder, test_eeg, test_labels) if len(test_labels) else None
        # Evaluation conditions come from the test split when it covers every train class.
        if held_out is not None and set(self.conditions.classes) <= set(held_out.classes):
            self.eval_conditions = held_out
        else:
            self.eval_conditions = self.conditions

        images, image_labels = ds.image_pool("train")
        self.images = to_channels_first(images)
        self.images_by_class = {int(c): np.flatnonzero(image_labels == c) for c in np.unique(image_labels)}

        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(derive_seed(seed, "gan"))
            self.generator = Generator(ds.image_size, cfg.latent_dim, base_channels=cfg.base_channels)
            self.discriminator = Discriminator(
                ds.image_size, base_channels=cfg.base_channels, cond_channels=cfg.cond_channels
            )
            self.generator.apply(init_weights)
            self.discriminator.apply(init_weights)
        self.generator.to(device)
        self.discriminator.to(device)

        betas = (cfg.beta1, cfg.beta2)
        self.opt_g = torch.optim.Adam(self.generator.parameters(), lr=cfg.lr, betas=betas)
        self.opt_d = torch.optim.Adam(self.discriminator.parameters(), lr=cfg.lr, betas=betas)

        self.rng = numpy_rng(seed, "gan")
        self.latents = LatentSampler(cfg.latent_dim, derive_seed(seed, "gan") + 1)
        self.augment = (
            DiffAugment(AugmentationPolicy.from_config(cfg.augment), derive_seed(seed, "augment"))
            if cfg.use_aug
            else None
        )
        self.step = 0

    def sample_batch(self, batch_size: int | None = None) -> GanBatch:
        """Draw real (image, condition) pairs and independent fake conditions.

        A real pair is an EEG embedding and a random train image of the same
        class. A fake condition draws its class uniformly, then a real window
        of that class, so rare classes are conditioned on as often as common ones.
        """
        n = batch_size or self.cfg.batch_size
        psi_real, real_labels = self.conditions.sample(n, self.rng)
        image_idx = np.array([self.rng.choice(self.images_by_class[int(c)]) for c in real_labels], dtype=np.int64)
        fake_labels = self.rng.choice(np.asarray(self.conditions.classes, dtype=np.int64), size=n)
        psi_fake = self.conditions.for_labels(fake_labels, self.rng)
        if self.cfg.use_ms:
            z1, z2 = self.latents.sample_pair(n)
        else:
            z1, z2 = self.latents.sample(n), None
        return GanBatch(
            real=self.images[torch.from_numpy(image_idx)].to(self.device),
            psi_real=psi_real.to(self.device),
            psi_fake=psi_fake.to(self.device),
            fake_labels=fake_labels,
            z1=z1.to(self.device),
            z2=None if z2 is None else z2.to(self.device),
        )

    def _check(self, value: torch.Tensor, term: str) -> None:
        if not torch.isfinite(value):
            raise TrainingError(step=self.step, term=term, value=float(value))

    def d_step(self, batch: GanBatch) -> float:
        """One discriminator update; returns the hinge loss."""
        self.generator.train()
        self.discriminator.train()
        with torch.no_grad():
            fake = self.generator(batch.z1, batch.psi_fake)
        loss = d_loss_hinge(self.discriminator, batch.real, fake, batch.psi_real, batch.psi_fake, self.augment)
        self._check(loss, "d_loss")
        self.opt_d.zero_grad()
        loss.backward()
        self.opt_d.step()
        return loss.item()

    def g_step(self, batch: GanBatch) -> tuple[float, float]:
        """One generator update; returns (adversarial loss, mode-seeking loss).

        With mode seeking on, both latents of the pair go through G in one
        batch and both halves feed the adversarial term.
        """
        self.generator.train()
        self.discriminator.train()
        n = batch.z1.shape[0]
        if batch.z2 is not None:
            psi = torch.cat([batch.psi_fake, batch.psi_fake])
            fake = self.generator(torch.cat([batch.z1, batch.z2]), psi)
        else:
            psi = batch.psi_fake
            fake = self.generator(batch.z1, psi)

        g_loss = g_loss_hinge(self.discriminator, fake, psi, self.augment)
        self._check(g_loss, "g_loss")
        total = g_loss
        ms_loss = torch.zeros(())
        if self.cfg.use_ms and batch.z2 is not None:
            ms_loss = mode_seeking_from_images(fake[:n], fake[n:], batch.z1, batch.z2, self.cfg.eps_ms)
            self._check(ms_loss, "ms_loss")
            total = g_loss + self.cfg.alpha * ms_loss

        self.opt_g.zero_grad()
        total.backward()
        self.opt_g.step()
        return g_loss.item(), ms_loss.item()

    def train_step(self) -> dict[str, float]:
        """d_steps_per_g_step discriminator updates, then one generator update."""
        self.step += 1
        for _ in range(self.cfg.d_steps_per_g_step):
            batch = self.sample_batch()
            d_loss = self.d_step(batch)
        g_loss, ms_loss = self.g_step(batch)
        return {"d_loss": d_loss, "g_loss": g_loss, "ms_loss": ms_loss}

    def generate_for_labels(self, labels: np.ndarray, rng: np.random.Generator, latents: LatentSampler) -> torch.Tensor:
        """Eval-mode images for held-out conditions of the requested classes."""
        psi = self.eval_conditions.for_labels(labels, rng).to(self.device)
        z = latents.sample(len(labels)).to(self.device)
        return generate(self.generator, z, psi)


def evaluation_labels(classes: list[int], per_class: int) -> np.ndarray:
    return np.repeat(np.asarray(classes, dtype=np.int64), per_class)


def _save_checkpoints(trainer: GanTrainer, output_dir: Path) -> None:
    save_generator(output_dir / "generator", trainer.generator)
    save_discriminator(output_dir / "discriminator", trainer.discriminator)


def train_gan(
    ds: PairedDataset,
    encoder: EncoderModel,
    cfg: GanConfig,
    seed: int,
    device: str = "cpu",
    classifier: Classifier | None = None,
    output_dir: Path | None = None,
    images_per_class: int = 50,
    splits: int = 10,
    progress_callback: ProgressCallback | None = None,
) -> GanTrainingResult:
    """Train the conditional GAN.

    Args:
        ds: Paired dataset (train EEG windows condition G; train images are real samples)
        encoder: Trained encoder, frozen for the whole run
        cfg: GAN settings
        seed: Master seed; G/D init, batches, latents and augmentation use named sub-streams
        device: torch device
        classifier: Probability-emitting image classifier for IS and class consistency
        output_dir: When given, receives gan_log.csv, checkpoints and sample sheets
        images_per_class: Generated images per class at each evaluation
        splits: Inception score splits
        progress_callback: Called as (step, steps, row) after each logged step

    Returns:
        GanTrainingResult with both models and the metric log

    Raises:
        TrainingError: If a loss term becomes non-finite
    """
    trainer = GanTrainer(ds, encoder, cfg, seed, device)
    log_path = output_dir / "gan_log.csv" if output_dir is not None else None
    log = MetricLog(GAN_COLUMNS, log_path)

    # Fixed conditions and latents so sample sheets are comparable across steps.
    sheet_rng = numpy_rng(seed, "metrics")
    sheet_labels = evaluation_labels(trainer.eval_conditions.classes, SAMPLES_PER_CLASS_IN_SHEET)
    sheet_psi = trainer.eval_conditions.for_labels(sheet_labels, sheet_rng).to(device)
    sheet_z = LatentSampler(cfg.latent_dim, derive_seed(seed, "metrics")).sample(len(sheet_labels)).to(device)
    eval_labels = evaluation_labels(trainer.eval_conditions.classes, images_per_class)
    splits = min(splits, len(eval_labels))

    logger.info(
        "Training GAN for %d steps (mode seeking %s, augmentation %s)",
        cfg.steps, "on" if cfg.use_ms else "off", "on" if cfg.use_aug else "off",
    )
    for step in range(1, cfg.steps + 1):
        losses = trainer.train_step()
        last = step == cfg.steps
        row: dict[str, Any] = {}

        if step % cfg.log_every == 0 or last:
            row = {"step": step, **losses}
        if step % cfg.eval_every == 0 or last:
            eval_rng = numpy_rng(seed, "metrics")
            eval_latents = LatentSampler(cfg.latent_dim, derive_seed(seed, "metrics") + 1)
            images = trainer.generate_for_labels(eval_labels, eval_rng, eval_latents)
            row = {"step": step, **losses, **score_samples(images, eval_labels, classifier, splits)}
        if row:
            log.append(row)
            logger.info(
                "step %d d_loss %.4f g_loss %.4f ms_loss %.4f",
                step, row["d_loss"], row["g_loss"], row["ms_loss"],
            )
            if progress_callback:
                progress_callback(step, cfg.steps, row)

        if output_dir is not None:
            if step % cfg.sample_every == 0 or last:
                export_image_grid(
                    generate(trainer.generator, sheet_z, sheet_psi),
                    output_dir / "samples" / f"step_{step:06d}.png",
                    nrow=SAMPLES_PER_CLASS_IN_SHEET,
                )
            if step % cfg.checkpoint_every == 0 or last:
                _save_checkpoints(trainer, output_dir)

    if output_dir is not None and cfg.steps == 0:
        _save_checkpoints(trainer, output_dir)

    trainer.generator.eval()
    trainer.discriminator.eval()
    return GanTrainingResult(generator=trainer.generator, discriminator=trainer.discriminator, log=log)
