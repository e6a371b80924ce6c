"""Seeded xoshiro256** stream shared by the Python operations and the compiled tick loop.

The state is a ``uint64[4]`` array mutated in place, so the same stream can be
handed back and forth between Python wrappers and njit code without drift.
"""

import numpy as np
from numba import njit

_U = np.uint64
_MASK53 = 2.0**-53


@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def seed_state(seed):
    state = np.empty(4, dtype=np.uint64)
    z = np.uint64(seed)
    for i in range(4):
        z = z + np.uint64(0x9E3779B97F4A7C15)
        x = z
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        state[i] = x ^ (x >> np.uint64(31))
    return state


@njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def below(s, n):
    """Uniform integer in [0, n) by rejection; n >= 1."""
    un = np.uint64(n)
    threshold = (np.uint64(0) - un) % un
    while True:
        x = next_u64(s)
        if x >= threshold:
            return np.int64(x % un)


@njit(cache=True)
def uniform(s):
    """Uniform float in [0, 1) with 53 random bits."""
    return np.float64(next_u64(s) >> np.uint64(11)) * _MASK53


@njit(cache=True)
def threshold_draw(s):
    """Uniform integer threshold in [1, 100]."""
    return below(s, 100) + 1


class Stream:
    """Python handle over a xoshiro256** state array."""

    def __init__(self, seed: int):
        self.state = seed_state(_U(seed))

    def below(self, n: int) -> int:
        return int(below(self.state, n))

    def uniform(self) -> float:
        return float(uniform(self.state))

    def threshold(self) -> int:
        return int(threshold_draw(self.state))

    def sample(self, items, k: int) -> list:
        """k items drawn uniformly without replacement (partial Fisher-Yates)."""
        pool = list(items)
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
