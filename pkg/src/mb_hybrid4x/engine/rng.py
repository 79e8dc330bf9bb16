"""Seeded generator whose full state lives inside GameState."""

from typing import Any

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Fresh PCG64 generator for a seed."""
    return np.random.Generator(np.random.PCG64(seed))


def restore_rng(state: dict[str, Any]) -> np.random.Generator:
    """Rebuild a generator from a snapshot taken by `snapshot_rng`."""
    bit_generator = np.random.PCG64()
    bit_generator.state = state
    return np.random.Generator(bit_generator)


def snapshot_rng(rng: np.random.Generator) -> dict[str, Any]:
    """Plain-dict snapshot of the generator state, suitable for JSON."""
    return dict(rng.bit_generator.state)
