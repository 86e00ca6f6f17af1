"""SplitMix64 random streams shared by the Python and compiled kernels.

Both backends draw from the same generator so that a seeded single-worker
run gives bit-identical tours whichever backend is loaded.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_seed(master: int, index: int) -> int:
    """Counter-based split: the seed of sub-stream ``index`` of ``master``.

    Ant streams depend only on (master, ant id), never on which worker runs
    the ant.
    """
    return mix64((mix64(master) + (index + 1) * GOLDEN) & MASK64)


def uniform_at(state: int) -> tuple[float, int]:
    """Advance ``state`` once; return a double in [0, 1) and the new state."""
    state = (state + GOLDEN) & MASK64
    return (mix64(state) >> 11) * INV_2_53, state


def uniforms_at(state: int, k: int) -> tuple[np.ndarray, int]:
    """``k`` consecutive draws, vectorised. Same values as k calls to uniform_at."""
    if k <= 0:
        return np.empty(0), state
    with np.errstate(over="ignore"):
        z = np.uint64(state) + np.uint64(GOLDEN) * np.arange(1, k + 1, dtype=np.uint64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
    u = (z >> np.uint64(11)).astype(np.float64) * INV_2_53
    return u, (state + k * GOLDEN) & MASK64


def below(u: float, n: int) -> int:
    """Map a uniform draw to an integer in [0, n)."""
    return min(int(u * n), n - 1)


class SplitMix64:
    """Stateful wrapper used by Python-side callers (ants, tests)."""

    __slots__ = ("state",)

    def __init__(self, seed: int = 0) -> None:
        self.state = seed & MASK64

    @classmethod
    def for_stream(cls, master: int, index: int) -> "SplitMix64":
        return cls(stream_seed(master, index))

    def random(self) -> float:
        u, self.state = uniform_at(self.state)
        return u

    def randbelow(self, n: int) -> int:
        return below(self.random(), n)

    def randoms(self, k: int) -> np.ndarray:
        u, self.state = uniforms_at(self.state, k)
        return u

    def __repr__(self) -> str:
        return f"SplitMix64(state={self.state:#018x})"
