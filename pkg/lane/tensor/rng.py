"""
Seeded random streams.

All randomness in lane (weight init, shuffles, splits, dataset enlargement)
flows through SeededRng, a thin wrapper over numpy's PCG64 bit generator.
PCG64 has a published reference implementation, so a seed reproduces the
same stream in any language that implements it.

Child streams are derived through SeedSequence spawn keys rather than by
re-seeding with arithmetic on the seed.
"""

from typing import Any

import numpy as np

SEED_LIMIT = 2**64


class SeededRng:
    """Deterministic random stream identified by (seed, spawn key)."""

    def __init__(self, seed: int, spawn_key: tuple[int, ...] = ()) -> None:
        if not 0 <= seed < SEED_LIMIT:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.spawn_key = spawn_key
        if spawn_key:
            bit_generator = np.random.PCG64(
                np.random.SeedSequence(seed, spawn_key=spawn_key)
            )
        else:
            bit_generator = np.random.PCG64(seed)
        self._generator = np.random.Generator(bit_generator)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, spawn_key={self.spawn_key})"

    @property
    def state(self) -> dict[str, Any]:
        """Current bit generator state."""
        return self._generator.bit_generator.state

    def derive(self, *keys: int) -> "SeededRng":
        """Independent child stream; same (seed, keys) gives the same child."""
        return SeededRng(self.seed, self.spawn_key + tuple(keys))

    def random(self, size: int) -> np.ndarray:
        """Draw `size` float64 values in [0, 1)."""
        return self._generator.random(size)

    def uniform(self, lo: float, hi: float, size: int) -> np.ndarray:
        """Draw `size` float64 values in [lo, hi)."""
        return lo + (hi - lo) * self._generator.random(size)

    def permutation(self, n: int) -> np.ndarray:
        """Random ordering of range(n)."""
        return self._generator.permutation(n)
