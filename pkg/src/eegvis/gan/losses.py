"""Adversarial and mode-seeking losses.

The discriminator and generator use the hinge formulation. The vanilla
minimax objective (log D(x) + log(1 - D(G(z)))) is not offered as a training
mode: it collapses to few modes on this task.
"""

from collections.abc import Callable

import torch
import torch.nn.functional as F

from eegvis.core.errors import InvalidDataError

Critic = Callable[[torch.Tensor, torch.Tensor], torch.Tensor]
Augment = Callable[[torch.Tensor], tuple[torch.Tensor, object]]


def _augmented(x: torch.Tensor, augment: Augment | None) -> torch.Tensor:
    return x if augment is None else augment(x)[0]


def _require_batch(x: torch.Tensor, name: str) -> None:
    if x.shape[0] == 0:
        raise InvalidDataError(f"Empty {name} batch")


def d_loss_hinge(
    discriminator: Critic,
    real: torch.Tensor,
    fake: torch.Tensor,
    psi_real: torch.Tensor,
    psi_fake: torch.Tensor,
    augment: Augment | None = None,
) -> torch.Tensor:
    """mean(relu(1 - D(T(x), psi))) + mean(relu(1 + D(T(G(z, psi)), psi))).

    ``augment`` is called separately on the real and the fake batch, so each
    gets an independent draw. Without it the loss is the plain hinge loss.
    """
    _require_batch(real, "real")
    _require_batch(fake, "fake")
    real_scores = discriminator(_augmented(real, augment), psi_real)
    fake_scores = discriminator(_augmented(fake, augment), psi_fake)
    return F.relu(1.0 - real_scores).mean() + F.relu(1.0 + fake_scores).mean()


def g_loss_hinge(
    discriminator: Critic,
    fake: torch.Tensor,
    psi: torch.Tensor,
    augment: Augment | None = None,
) -> torch.Tensor:
    """-mean(D(T(G(z, psi)), psi)). Unbounded below."""
    _require_batch(fake, "fake")
    return -discriminator(_augmented(fake, augment), psi).mean()


def mode_seeking_from_images(
    images1: torch.Tensor,
    images2: torch.Tensor,
    z1: torch.Tensor,
    z2: torch.Tensor,
    eps: float = 1e-5,
) -> torch.Tensor:
    """Batch mean of d_z / (d_I + eps), both distances mean absolute differences."""
    d_images = (images1 - images2).abs().flatten(1).mean(dim=1)
    d_latent = (z1 - z2).abs().flatten(1).mean(dim=1)
    return (d_latent / (d_images + eps)).mean()


def mode_seeking_loss(
    generator: Callable[[torch.Tensor, torch.Tensor], torch.Tensor],
    psi: torch.Tensor,
    z1: torch.Tensor,
    z2: torch.Tensor,
    eps: float = 1e-5,
) -> torch.Tensor:
    """Inverse ratio of image distance to latent distance under one condition.

    Both latents go through the generator in one batch so batch-norm
    statistics are shared between the pair.
    """
    _require_batch(psi, "condition")
    n = psi.shape[0]
    images = generator(torch.cat([z1, z2]), torch.cat([psi, psi]))
    return mode_seeking_from_images(images[:n], images[n:], z1, z2, eps)
