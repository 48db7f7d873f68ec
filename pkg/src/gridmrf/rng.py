"""Seedable deterministic random number generation.

All stochastic routines in this package draw from a splitmix64 stream, a
64-bit generator with full-period state update ``s += 0x9E3779B97F4A7C15``
and an output mixing function.  It is implemented twice: here in pure
Python (used for seed derivation and for drawing outside compiled kernels)
and again inside the numba kernels in ``sampler.py``.  The two
implementations are cross-checked by tests so that a given seed produces
bit-identical streams everywhere, on every platform.

Uniform doubles use the top 53 bits of the output: ``u = (z >> 11) / 2^53``,
giving values in [0, 1).
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# 1/2^53: converts the top 53 bits of a 64-bit word to a double in [0, 1)
U53_SCALE = 1.0 / 9007199254740992.0


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; return (new_state, 64-bit output)."""
    state = (state + _GOLDEN) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return state, z ^ (z >> 31)


def mix64(value: int) -> int:
    """Apply the splitmix64 output mix to a single 64-bit word."""
    z = value & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


def derive_seed(seed: int, tag: str) -> int:
    """Derive an independent child seed from a parent seed and a label.

    Splitting scheme: ``mix64(seed XOR fnv1a64(tag))``.  Distinct tags give
    decorrelated streams; the same (seed, tag) pair always gives the same
    child.
    """
    return mix64((seed & _MASK64) ^ _fnv1a64(tag))


class Stream:
    """Stateful splitmix64 stream with uniform-double output."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uniform(self) -> float:
        self._state, z = splitmix64_next(self._state)
        return (z >> 11) * U53_SCALE

    def state_array(self) -> np.ndarray:
        """Current state as a length-1 uint64 array (numba kernel calling
        convention; kernels mutate it in place)."""
        return np.array([self._state], dtype=np.uint64)

    def set_state(self, arr: np.ndarray) -> None:
        self._state = int(arr[0])
