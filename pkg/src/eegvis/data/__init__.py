"""Dataset container, paired datasets and synthetic data."""
