"""
Deterministic 64-bit word streams.

A stream is identified by a 64-bit seed and a 64-bit stream index. The
mapping (seed, stream) -> words is

    PCG64(SeedSequence(entropy=seed, spawn_key=(stream,))).random_raw(count)

so releases and trials are bit-reproducible across runs and platforms.
Trial ``t`` of an experiment uses stream index ``t``.
"""
from typing import Protocol

import numpy as np

UINT64_LIMIT = 2**64


class NoiseStream(Protocol):
    """Source of raw 64-bit words; one word per noise coordinate."""

    def next_words(self, count: int) -> np.ndarray:
        ...


class SeededStream:
    """PCG64 word stream keyed by (seed, stream index)."""

    def __init__(self, seed: int, stream: int = 0):
        if not 0 <= seed < UINT64_LIMIT:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if not 0 <= stream < UINT64_LIMIT:
            raise ValueError(f"stream index must be a 64-bit unsigned integer, got {stream}")
        self.seed = seed
        self.stream = stream
        self._bit_generator = np.random.PCG64(
            np.random.SeedSequence(entropy=seed, spawn_key=(stream,))
        )

    def next_words(self, count: int) -> np.ndarray:
        if count == 0:
            return np.zeros(0, dtype=np.uint64)
        return np.asarray(self._bit_generator.random_raw(count), dtype=np.uint64)

    def numpy_generator(self) -> np.random.Generator:
        """Generator sharing this stream's state, for non-noise sampling."""
        return np.random.Generator(self._bit_generator)

    def __repr__(self) -> str:
        return f"SeededStream(seed={self.seed}, stream={self.stream})"


class ZeroStream:
    """Emits all-zero words, which the geometric sampler maps to zero noise."""

    def next_words(self, count: int) -> np.ndarray:
        return np.zeros(count, dtype=np.uint64)
