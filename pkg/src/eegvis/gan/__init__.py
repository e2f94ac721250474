"""Conditional GAN: models, augmentation, losses and training."""
