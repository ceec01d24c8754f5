"""Deterministic random streams.

A stream is addressed by ``(master_seed, replica, walker)`` and derived with
``numpy.random.SeedSequence`` (spawn key ``(replica, walker)``).  Python-level
code draws from ``numpy.random.Generator`` (PCG64); compiled kernels receive a
32-bit seed for numba's per-thread Mersenne Twister.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GENERATOR_FAMILY = "numpy.SeedSequence -> PCG64 (python) / MT19937 (numba kernels)"


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    replica: int = 0
    walker: int = 0

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed,
                                      spawn_key=(self.replica, self.walker))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed_sequence())

    def kernel_seed(self) -> int:
        return int(self.seed_sequence().generate_state(1, np.uint32)[0])


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an int seed, an RngStream or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


def kernel_seed(rng) -> int:
    """Draw a fresh 32-bit kernel seed from `rng`."""
    return int(as_generator(rng).integers(0, 2**32, dtype=np.uint64))
