"""A seeded, platform-independent random number stream for the graph generators.

The stream is xoshiro256** run on a fixed number of independent lanes, each lane
seeded by consecutive outputs of splitmix64. Values are produced lane-interleaved:
the first draw of every lane, then the second draw of every lane, and so on. The
algorithm, the lane count and the interleaving are frozen, so a seed yields the
same stream on every platform and numpy version.
"""

from __future__ import annotations

import gc

import numpy as np
from attrs import define, field
from attrs.validators import ge, instance_of

_MASK64 = (1 << 64) - 1

LANES = 64
"""The number of interleaved generator lanes."""


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state.

    Returns:
        The new state and the output.

    Example:
        >>> splitmix64(0)[1]
        16294208416658607535
    """
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: np.ndarray, k: int) -> np.ndarray:
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@define(eq=False)
class Xoshiro256:
    """A lane-parallel xoshiro256** generator."""

    seed: int = field(validator=[instance_of(int), ge(0)])
    """The seed. Only its lowest 64 bits are used."""

    _state: np.ndarray = field(init=False, repr=False)

    def __attrs_post_init__(self) -> None:
        words = []
        state = self.seed & _MASK64
        for _ in range(4 * LANES):
            state, out = splitmix64(state)
            words.append(out)
        self._state = np.array(words, dtype=np.uint64).reshape(LANES, 4).T.copy()

    def _step(self) -> np.ndarray:
        s = self._state
        result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
        t = s[1] << np.uint64(17)
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def next_u64(self, count: int) -> np.ndarray:
        """The next ``count`` 64-bit outputs."""
        rounds = -(-count // LANES)
        with np.errstate(over="ignore"):
            blocks = [self._step() for _ in range(rounds)]
        if not blocks:
            return np.zeros(0, dtype=np.uint64)
        return np.concatenate(blocks)[:count]

    def random(self, count: int) -> np.ndarray:
        """``count`` floats uniform in ``[0, 1)`` with 53 random bits each."""
        return (self.next_u64(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def integers(self, low: int, high: int, count: int) -> np.ndarray:
        """``count`` integers uniform in ``[low, high)``."""
        if high <= low:
            raise ValueError(f"Empty range [{low}, {high}).")
        span = high - low
        values = np.floor(self.random(count) * span).astype(np.int64)
        return np.minimum(values, span - 1) + low


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
