"""Seedable xoshiro256++ generator used by the step engine.

The simulation loop needs a random stream that is cheap inside a compiled
kernel, bit-reproducible across platforms, and easy to mirror in pure Python
so the reference step implementation consumes exactly the same draws as the
fast path.  numpy's Generator objects satisfy none of those inside numba, so
the engine carries its own state: four 64-bit words, advanced by
xoshiro256++ and seeded through splitmix64.

:class:`Xoshiro256` is the pure-Python mirror; the compiled twin lives in
``echosim._kernel``.  Both are exercised against each other in the tests.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_INV_2POW53 = 1.0 / 9007199254740992.0  # 2**-53


def seed_state(seed: int) -> np.ndarray:
    """Expand an integer seed into a 4-word xoshiro256++ state (splitmix64)."""
    state = np.empty(4, dtype=np.uint64)
    z = seed & _MASK64
    for k in range(4):
        z = (z + 0x9E3779B97F4A7C15) & _MASK64
        w = z
        w = ((w ^ (w >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        w = ((w ^ (w >> 27)) * 0x94D049BB133111EB) & _MASK64
        state[k] = (w ^ (w >> 31)) & _MASK64
    if not state.any():
        state[0] = 1  # the all-zero state is a fixed point of the update
    return state


class Xoshiro256:
    """Pure-Python xoshiro256++, draw-for-draw identical to the kernel RNG."""

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        self._s = [int(w) for w in seed_state(seed)]

    def next_u64(self) -> int:
        s = self._s
        tmp = (s[0] + s[3]) & _MASK64
        result = (((tmp << 23) | (tmp >> 41)) + s[0]) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = ((s[3] << 45) | (s[3] >> 19)) & _MASK64
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2POW53

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n) via threshold rejection (unbiased)."""
        threshold = ((1 << 64) - n) % n  # == 2**64 mod n
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % n

    def state(self) -> np.ndarray:
        return np.array(self._s, dtype=np.uint64)
