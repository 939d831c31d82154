"""Seed derivation for reproducible component streams.

One master seed drives everything (weight init, epoch shuffles, augmentation,
replay buffers). Each consumer gets its own stream derived from the master
seed plus a string/int tag path, so adding a consumer never perturbs the
draws of another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, *tags) -> int:
    """Stable 64-bit seed for the component identified by `tags`."""
    h = hashlib.sha256()
    h.update(str(int(master_seed)).encode())
    for tag in tags:
        h.update(b"/")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest()[:8], "little")


def spawn_rng(master_seed: int, *tags) -> np.random.Generator:
    """Fresh PCG64 generator for the component identified by `tags`."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *tags)))


def rng_state(rng: np.random.Generator) -> dict:
    """JSON-serializable snapshot of a generator's state."""
    return rng.bit_generator.state


def restore_rng(state: dict) -> np.random.Generator:
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = state
    return rng
