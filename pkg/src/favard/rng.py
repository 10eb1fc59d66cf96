"""Counter-based splitmix64 streams.

The generator is stateless: draw number ``i`` of stream ``seed`` is

    z = seed + (i + 1) * 0x9E3779B97F4A7C15          (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

which is exactly the i-th output of a splitmix64 generator seeded with
``seed``.  Uniform doubles take the top 53 bits: ``(z >> 11) * 2**-53``.
Independent sub-streams are derived with ``substream(seed, tag)``.

Because every draw is addressed by its counter, results do not depend on the
order in which threads consume them.
"""
from __future__ import annotations

import numpy as np

from ._accel import njit

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

# sub-stream tags
TAG_MODEL = 1
TAG_NEEDLE = 2
TAG_THETA = 3


def as_seed(seed: int) -> int:
    return int(seed) & MASK64


def mix64_int(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def draw_int(seed: int, counter: int) -> int:
    return mix64_int(as_seed(seed) + (int(counter) + 1) * GAMMA)


def substream(seed: int, tag: int) -> int:
    return mix64_int(as_seed(seed) ^ mix64_int(tag))


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def draw(seed: int, counters) -> np.ndarray:
    c = np.asarray(counters, dtype=np.uint64)
    return mix64(np.uint64(as_seed(seed)) + (c + np.uint64(1)) * np.uint64(GAMMA))


def uniform(seed: int, counters) -> np.ndarray:
    return (draw(seed, counters) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


@njit
def draw_nb(seed, counter):
    z = np.uint64(seed) + (np.uint64(counter) + np.uint64(1)) * np.uint64(GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


@njit
def uniform_nb(seed, counter):
    return np.float64(draw_nb(seed, counter) >> np.uint64(11)) * (2.0 ** -53)
