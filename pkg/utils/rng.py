"""
SEQMEM - COUNTER-BASED RANDOM STREAMS
splitmix64 finalizer over (key, counter) pairs, vectorized with numpy.

Every draw is a pure function of (key, counter), so a trial's matrix does not
depend on which worker or batch produced it. Reproducible across platforms
within this package; no bit-compatibility with other implementations is promised.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

GENERATOR_NAME = "splitmix64-counter"
GENERATOR_VERSION = "1"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / float(1 << 53)

IntLike = Union[int, np.ndarray]


def _u64(x: IntLike) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return x.astype(np.uint64, copy=False)
    return np.asarray(int(x) & _MASK64, dtype=np.uint64)


def mix64(x: IntLike) -> np.ndarray:
    """splitmix64 output finalizer (wrapping uint64 arithmetic)."""
    z = _u64(x)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MUL1
        z = (z ^ (z >> np.uint64(27))) * _MUL2
        z = z ^ (z >> np.uint64(31))
    return z


def trial_keys(seed: int, trial_indices) -> np.ndarray:
    """Per-trial stream keys: mix64(mix64(seed) XOR trial_index)."""
    idx = np.asarray(trial_indices, dtype=np.int64).astype(np.uint64)
    return mix64(mix64(seed) ^ idx)


def uniform_block(keys: np.ndarray, count: int, offset: int = 0) -> np.ndarray:
    """
    Uniform doubles in [0, 1) for counters offset..offset+count-1 of each key.
    `keys` of shape (T,) gives a (T, count) array; a scalar key gives (count,).
    """
    keys = _u64(keys)
    counters = (np.arange(count, dtype=np.uint64) + np.uint64(offset + 1))
    with np.errstate(over="ignore"):
        state = keys[..., None] + counters * _GOLDEN
    bits = mix64(state) >> np.uint64(11)
    return bits.astype(np.float64) * _INV_2_53


@dataclass
class CounterStream:
    """A moving counter over one key; the only stateful piece of the generator."""
    key: int
    position: int = 0

    @classmethod
    def from_seed(cls, seed: int) -> "CounterStream":
        return cls(key=int(mix64(seed)))

    def uniform(self, size: int) -> np.ndarray:
        values = uniform_block(np.uint64(self.key), size, self.position)
        self.position += size
        return values

    def integers(self, high: int, size: int) -> np.ndarray:
        """Uniform integers in [0, high)."""
        draws = np.floor(self.uniform(size) * high).astype(np.int64)
        return np.minimum(draws, high - 1)
