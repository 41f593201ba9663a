"""Counter-based random substreams.

Every random draw in knapmix is a pure function of ``(seed, stream, counter)``
so trajectories can be generated in any order, in parallel, or vectorized
across thousands of replicates while staying bit-for-bit reproducible.

Algorithm (SplitMix64, Steele/Lea/Flood 2014):

* ``mix64(z)``: ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` (all mod 2**64).
* stream key: ``key = mix64(mix64(seed) ^ stream)``.
* raw word number ``t`` (0-based) of a stream: ``mix64(key + (t + 1) * 0x9E3779B97F4A7C15)``,
  i.e. the SplitMix64 sequence started from state ``key``.
* integer in ``[0, m)``: ``((word >> 11) * m) >> 53``, the top 53 bits scaled
  to ``m``.  The bias is below ``m / 2**53``; ``m`` must be below ``2**11``.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
MAX_BOUND = 1 << 11


def _u64(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=np.uint64))


def _mix_inplace(z: np.ndarray) -> np.ndarray:
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


def mix64(z) -> np.ndarray:
    return _mix_inplace(_u64(z).copy())


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def stream_keys(seed: int, streams) -> np.ndarray:
    """Keys of the given substream indices under ``seed``."""
    base = mix64(check_seed(seed))
    return mix64(base ^ _u64(streams))


def words(keys: np.ndarray, counter: int) -> np.ndarray:
    """Raw 64-bit word ``counter`` of every stream in ``keys``."""
    offset = np.uint64(((counter + 1) * int(GOLDEN)) & _MASK64)
    return _mix_inplace(keys + offset)


def below(keys: np.ndarray, counter: int, bound: int) -> np.ndarray:
    """Integer draw in ``[0, bound)`` at position ``counter`` of each stream."""
    if not 1 <= bound < MAX_BOUND:
        raise ValueError(f"bound must lie in [1, {MAX_BOUND}), got {bound}")
    z = words(keys, counter)
    z >>= np.uint64(11)
    z *= np.uint64(bound)
    z >>= np.uint64(53)
    return z


def derive_seed(seed: int, *labels: int) -> int:
    """Child seed for a labelled sub-task, e.g. ``derive_seed(s, repeat, level)``."""
    h = mix64(check_seed(seed))
    for label in labels:
        h = mix64(h ^ mix64((int(label) + int(GOLDEN)) & _MASK64))
    return int(h[0])
