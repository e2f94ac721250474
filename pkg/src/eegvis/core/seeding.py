"""Named random sub-streams derived from one master seed."""

import zlib

import numpy as np
import torch

STREAMS = ("data", "encoder", "gan", "augment", "metrics")


def derive_seed(master: int, name: str) -> int:
    """Derive a stable 63-bit seed for the sub-stream ``name``.

    The same (master, name) pair always yields the same seed, across
    processes and Python versions.
    """
    key = zlib.crc32(name.encode("utf-8"))
    state = np.random.SeedSequence(entropy=master, spawn_key=(key,)).generate_state(2, np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1])) & 0x7FFF_FFFF_FFFF_FFFF


def numpy_rng(master: int, name: str) -> np.random.Generator:
    """numpy Generator for a named sub-stream."""
    return np.random.default_rng(derive_seed(master, name))


def torch_generator(seed: int) -> torch.Generator:
    """CPU torch Generator seeded with ``seed``."""
    generator = torch.Generator(device="cpu")
    generator.manual_seed(seed)
    return generator
