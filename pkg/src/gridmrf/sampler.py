"""Gibbs sampler for lattice MRFs with random-scan cycles.

One cycle draws a fresh random permutation of the free pixels
(Fisher-Yates) and updates each exactly once from its full conditional
(inverse-CDF draw on the max-shifted softmax).  Fixed pixels keep their
initial value; masked pixels never participate.  All randomness comes from
the splitmix64 stream (see rng.py), so a given seed reproduces the output
bit-exactly on any platform.

The inner loops are numba-compiled; chains are sequential within
themselves and independent across seeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .fields import DiscreteField, PixelRegion
from .interactions import InteractionStructure
from .potentials import PotentialArray
from .rng import derive_seed

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_U53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _next_uniform(state):
    """Advance the splitmix64 state (length-1 uint64 array) and return a
    uniform double in [0, 1)."""
    s = state[0] + _GOLDEN
    state[0] = s
    z = s
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return (z >> _S11) * _U53


@njit(cache=True)
def _fill_uniform_labels(flat_labels, n_colors, state):
    for idx in range(flat_labels.size):
        u = _next_uniform(state)
        flat_labels[idx] = np.int64(u * n_colors)


@njit(cache=True)
def _gibbs_cycles(labels, in_lattice, rows, cols, order, r1s, r2s, theta,
                  n_cycles, state):
    """Run full Gibbs cycles in place.  rows/cols list the free pixels;
    order is scratch holding a permutation of 0..len(rows)-1."""
    n_free = rows.size
    n_colors = theta.shape[0]
    n_slices = r1s.size
    n, m = labels.shape
    h = np.empty(n_colors)
    for _ in range(n_cycles):
        for i in range(n_free - 1, 0, -1):
            u = _next_uniform(state)
            j = np.int64(u * (i + 1))
            tmp = order[i]
            order[i] = order[j]
            order[j] = tmp
        for t in range(n_free):
            idx = order[t]
            pi = rows[idx]
            pj = cols[idx]
            for c in range(n_colors):
                h[c] = 0.0
            for k in range(n_slices):
                ni = pi + r1s[k]
                nj = pj + r2s[k]
                if 0 <= ni < n and 0 <= nj < m and in_lattice[ni, nj]:
                    b = labels[ni, nj]
                    for c in range(n_colors):
                        h[c] += theta[c, b, k]
                mi = pi - r1s[k]
                mj = pj - r2s[k]
                if 0 <= mi < n and 0 <= mj < m and in_lattice[mi, mj]:
                    a = labels[mi, mj]
                    for c in range(n_colors):
                        h[c] += theta[a, c, k]
            hmax = h[0]
            for c in range(1, n_colors):
                if h[c] > hmax:
                    hmax = h[c]
            total = 0.0
            for c in range(n_colors):
                h[c] = np.exp(h[c] - hmax)
                total += h[c]
            u = _next_uniform(state) * total
            acc = 0.0
            new_label = n_colors - 1
            for c in range(n_colors):
                acc += h[c]
                if u < acc:
                    new_label = c
                    break
            labels[pi, pj] = new_label


@dataclass(frozen=True)
class SamplerConfig:
    """Arguments of a sampling run.

    cycles: number of full scans performed (each free pixel is updated
    exactly `cycles` times).  fixed_region pixels keep their initial value;
    sub_region restricts the lattice when sampling from dimensions.
    """

    cycles: int = 60
    seed: int = 0
    fixed_region: PixelRegion | None = None
    sub_region: PixelRegion | None = None

    def __post_init__(self):
        if self.cycles < 0:
            raise ValueError("cycles must be non-negative")


class GibbsChain:
    """A sampler chain owning its field state; used by the estimators to
    continue sampling across iterations without re-deriving seeds."""

    def __init__(self, init: DiscreteField, structure: InteractionStructure,
                 seed: int, fixed_region: PixelRegion | None = None):
        self.mask = init.mask
        self.labels = init.labels.copy()
        self.C = init.C
        self.structure = structure
        free = self.mask.copy()
        if fixed_region is not None:
            if not fixed_region.matches(self.mask.shape):
                raise ValueError("fixed_region dimensions do not match field")
            if (fixed_region.flags & ~self.mask).any():
                raise ValueError("fixed_region references masked pixels")
            free &= ~fixed_region.flags
        rows, cols = np.nonzero(free)
        self._rows = rows.astype(np.int64)
        self._cols = cols.astype(np.int64)
        self._order = np.arange(rows.size, dtype=np.int64)
        self._r1s = np.array([p[0] for p in structure], dtype=np.int64)
        self._r2s = np.array([p[1] for p in structure], dtype=np.int64)
        self._state = np.array([seed & ((1 << 64) - 1)], dtype=np.uint64)

    def reinitialize_uniform(self) -> None:
        """Redraw the free pixels i.i.d. uniform on {0..C} from the chain's
        own stream."""
        draws = np.empty(self._rows.size, dtype=np.int64)
        _fill_uniform_labels(draws, self.C + 1, self._state)
        self.labels[self._rows, self._cols] = draws

    def run(self, theta: np.ndarray, cycles: int) -> None:
        if cycles > 0 and self._rows.size > 0:
            _gibbs_cycles(self.labels, self.mask, self._rows, self._cols,
                          self._order, self._r1s, self._r2s, theta,
                          cycles, self._state)

    def field(self) -> DiscreteField:
        return DiscreteField(self.labels.copy(), self.mask, self.C)


def _uniform_init(dims: tuple[int, int], C: int, seed: int,
                  sub_region: PixelRegion | None) -> DiscreteField:
    n, m = dims
    mask = np.ones((n, m), dtype=bool)
    if sub_region is not None:
        if sub_region.flags.shape != (n, m):
            raise ValueError("sub_region dimensions do not match dims")
        mask = sub_region.flags.copy()
    labels = np.zeros((n, m), dtype=np.int64)
    flat = np.empty(int(mask.sum()), dtype=np.int64)
    state = np.array([derive_seed(seed, "init")], dtype=np.uint64)
    _fill_uniform_labels(flat, C + 1, state)
    labels[mask] = flat
    return DiscreteField(labels, mask, C)


def sample_mrf(init, structure: InteractionStructure, pot: PotentialArray,
               config: SamplerConfig) -> DiscreteField:
    """Sample a field by Gibbs cycles.

    `init` is either a DiscreteField (used as the starting configuration)
    or an (N, M) dimension pair, in which case the start is drawn i.i.d.
    uniform on {0..C}.  sub_region is only valid with the dimension form.
    """
    if list(structure.positions) != list(pot.structure.positions):
        raise ValueError("interaction structure does not match potentials")
    if isinstance(init, DiscreteField):
        if config.sub_region is not None:
            raise ValueError("sub_region requires dimension-form init")
        if init.C != pot.C:
            raise ValueError(
                f"C mismatch: init field has C={init.C}, potentials {pot.C}")
        start = init
    else:
        dims = (int(init[0]), int(init[1]))
        start = _uniform_init(dims, pot.C, config.seed, config.sub_region)
    chain = GibbsChain(start, structure, derive_seed(config.seed, "scan"),
                       config.fixed_region)
    chain.run(pot.theta, config.cycles)
    return chain.field()


def sample_conditional(z: DiscreteField, structure: InteractionStructure,
                       pot: PotentialArray,
                       config: SamplerConfig) -> DiscreteField:
    """Sample with the fixed_region pixels held at their values in z."""
    return sample_mrf(z, structure, pot, config)
