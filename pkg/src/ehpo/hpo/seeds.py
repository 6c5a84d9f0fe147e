"""Splittable seeded streams.

A stream is a pure function of ``(master_seed, stream_index, domain)``;
the bit generator is PCG64 keyed through numpy's ``SeedSequence`` spawn
keys, so distinct indices give independent streams.  Only raw uniform
doubles are consumed, which keeps the sequences stable across numpy
releases.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

MAX_SEED = 2**64

# domains keep HP sampling, evaluation noise and subsampling streams apart
HP_DRAW = 0
EVALUATION = 1
SUBSAMPLE = 2
DEMON = 3
SCOUT = 4


def label_key(label: str) -> int:
    """Stable small integer for a string label (e.g. an algorithm id)."""
    return zlib.crc32(label.encode("utf-8"))


@dataclass
class SeedStream:
    master_seed: int
    stream_index: int
    domain: tuple[int, ...] = ()
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.master_seed < MAX_SEED:
            raise ValueError(f"master seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.stream_index < 0:
            raise ValueError(f"stream index must be nonnegative, got {self.stream_index}")
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(*self.domain, self.stream_index))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def uniform(self) -> float:
        """Next draw, uniform on [0, 1)."""
        return float(self._gen.random())

    def uniforms(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    def symmetric(self) -> float:
        """Next draw, uniform on [-1, 1)."""
        return 2.0 * self.uniform() - 1.0

    def below(self, n: int) -> int:
        return min(int(self.uniform() * n), n - 1)


def derive_seed(master_seed: int, stream_index: int, *domain: int) -> SeedStream:
    return SeedStream(master_seed, stream_index, tuple(domain))


def batch_generator(master_seed: int, *domain: int) -> np.random.Generator:
    """One generator for vectorized batches (Monte Carlo estimators)."""
    if not 0 <= master_seed < MAX_SEED:
        raise ValueError(f"master seed must be a 64-bit unsigned integer, got {master_seed}")
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(domain))
    return np.random.Generator(np.random.PCG64(seq))


def child_seed(master_seed: int, *key: int) -> int:
    """A 64-bit master seed for a nested run, keyed by ``key``."""
    if not 0 <= master_seed < MAX_SEED:
        raise ValueError(f"master seed must be a 64-bit unsigned integer, got {master_seed}")
    state = np.random.SeedSequence(master_seed, spawn_key=tuple(key)).generate_state(2, np.uint32)
    return (int(state[0]) << 32) | int(state[1])
