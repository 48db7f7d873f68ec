"""Exact brute-force computations on toy lattices.

Everything here enumerates the full configuration space (bounded at
(C+1)^n <= 2^22 lattice configurations) and is meant for verifying the
approximate machinery at desk scale: exact partition function, exact
conditionals, exact expectations of the sufficient statistics, and the
exact maximum-likelihood estimate obtained by Newton's method on the
moment condition E_theta[S] = S(observed).

The energy of a configuration is computed by direct summation over pixel
pairs, independently of the histogram-based path in kernel.py.  A second,
transfer-matrix style oracle (row recursion) cross-checks the enumerator
for structures spanning at most two rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .fields import DiscreteField
from .interactions import InteractionStructure
from .potentials import (PotentialArray, class_index, expand_array,
                         family_dim, summarize_array)

ENUM_BOUND = 2 ** 22
_CHUNK = 2 ** 14


class EnumerationBoundError(ValueError):
    """Raised when the configuration space exceeds the enumeration bound."""


class MleBoundaryError(ValueError):
    """Raised when the observed statistic lies on the boundary of its
    achievable range, so the MLE diverges."""


def _resolve_mask(dims, mask=None) -> np.ndarray:
    n, m = int(dims[0]), int(dims[1])
    if mask is None:
        return np.ones((n, m), dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (n, m):
        raise ValueError("mask dimensions do not match dims")
    return mask


def _check_bound(n_sites: int, n_colors: int) -> int:
    n_configs = n_colors ** n_sites
    if n_configs > ENUM_BOUND:
        raise EnumerationBoundError(
            f"{n_colors}^{n_sites} configurations exceed the enumeration "
            f"bound 2^22")
    return n_configs


def _pair_arrays(mask: np.ndarray, structure: InteractionStructure):
    """Flatten valid pairs: arrays (src, dst, slice) of site indices, where
    a site index enumerates unmasked pixels in row-major order."""
    n, m = mask.shape
    site_of = np.full((n, m), -1, dtype=np.int64)
    site_of[mask] = np.arange(int(mask.sum()))
    src, dst, sl = [], [], []
    for k, (r1, r2) in enumerate(structure):
        for i in range(n):
            ni = i + r1
            if not 0 <= ni < n:
                continue
            for j in range(m):
                nj = j + r2
                if 0 <= nj < m and mask[i, j] and mask[ni, nj]:
                    src.append(site_of[i, j])
                    dst.append(site_of[ni, nj])
                    sl.append(k)
    return (np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
            np.array(sl, dtype=np.int64))


def _decode(indices: np.ndarray, n_sites: int, n_colors: int) -> np.ndarray:
    """Base-(C+1) digits of configuration indices: (batch, n_sites)."""
    powers = n_colors ** np.arange(n_sites, dtype=np.int64)
    return (indices[:, None] // powers[None, :]) % n_colors


def _chunk_ranges(n_configs: int):
    for start in range(0, n_configs, _CHUNK):
        yield start, min(start + _CHUNK, n_configs)


def _energies(digits: np.ndarray, pairs, theta: np.ndarray) -> np.ndarray:
    src, dst, sl = pairs
    h = np.zeros(digits.shape[0])
    for p in range(src.size):
        h += theta[digits[:, src[p]], digits[:, dst[p]], sl[p]]
    return h


def _stat_rows(digits: np.ndarray, pairs, cls: np.ndarray,
               dim: int) -> np.ndarray:
    """Family-aggregated statistic vector for each configuration row."""
    src, dst, sl = pairs
    s = np.zeros((digits.shape[0], dim))
    rows = np.arange(digits.shape[0])
    for p in range(src.size):
        m = cls[digits[:, src[p]], digits[:, dst[p]], sl[p]]
        ok = m >= 0
        np.add.at(s, (rows[ok], m[ok]), 1.0)
    return s


@dataclass(frozen=True)
class ExactModel:
    """Exact joint distribution of a toy lattice model."""

    dims: tuple[int, int]
    structure: InteractionStructure
    theta: PotentialArray
    mask: np.ndarray

    @staticmethod
    def build(dims, structure: InteractionStructure, theta: PotentialArray,
              mask=None) -> "ExactModel":
        m = _resolve_mask(dims, mask)
        _check_bound(int(m.sum()), theta.C + 1)
        return ExactModel((int(dims[0]), int(dims[1])), structure, theta, m)

    @property
    def n_sites(self) -> int:
        return int(self.mask.sum())

    @property
    def n_configs(self) -> int:
        return (self.theta.C + 1) ** self.n_sites

    def log_probabilities(self) -> np.ndarray:
        """Log probability of every configuration (row-major site order,
        last site varying slowest... index = sum z_p * (C+1)^p)."""
        n_colors = self.theta.C + 1
        pairs = _pair_arrays(self.mask, self.structure)
        h = np.empty(self.n_configs)
        for lo, hi in _chunk_ranges(self.n_configs):
            digits = _decode(np.arange(lo, hi), self.n_sites, n_colors)
            h[lo:hi] = _energies(digits, pairs, self.theta.theta)
        return h - logsumexp(h)

    def config_field(self, index: int) -> DiscreteField:
        """Decode a configuration index into a field."""
        n_colors = self.theta.C + 1
        digits = _decode(np.array([index]), self.n_sites, n_colors)[0]
        labels = np.zeros(self.mask.shape, dtype=np.int64)
        labels[self.mask] = digits
        return DiscreteField(labels, self.mask, self.theta.C)

    def config_index(self, z: DiscreteField) -> int:
        n_colors = self.theta.C + 1
        digits = z.labels[self.mask].astype(object)
        powers = [n_colors ** p for p in range(self.n_sites)]
        return int(sum(int(d) * pw for d, pw in zip(digits, powers)))


def partition_function(dims, structure: InteractionStructure,
                       theta: PotentialArray, mask=None) -> float:
    """log zeta: logsumexp of the energy over every configuration."""
    m = _resolve_mask(dims, mask)
    n_sites = int(m.sum())
    n_colors = theta.C + 1
    n_configs = _check_bound(n_sites, n_colors)
    pairs = _pair_arrays(m, structure)
    partials = []
    for lo, hi in _chunk_ranges(n_configs):
        digits = _decode(np.arange(lo, hi), n_sites, n_colors)
        partials.append(logsumexp(_energies(digits, pairs, theta.theta)))
    return float(logsumexp(np.array(partials)))


def partition_function_transfer(dims, structure: InteractionStructure,
                                theta: PotentialArray) -> float:
    """Independent second oracle: row-recursion log partition function for
    structures spanning at most two rows (all |r1| <= 1), full lattice only.
    """
    n, m = int(dims[0]), int(dims[1])
    if structure.max_row_span() > 1:
        raise ValueError("transfer oracle requires all |r1| <= 1")
    n_colors = theta.C + 1
    n_states = n_colors ** m
    if n_states > 2 ** 14:
        raise EnumerationBoundError("row state space too large")
    states = _decode(np.arange(n_states), m, n_colors)
    th = theta.theta

    within = np.zeros(n_states)
    between = np.zeros((n_states, n_states))
    for k, (r1, r2) in enumerate(structure.positions):
        for q in range(m):
            if not 0 <= q + r2 < m:
                continue
            if r1 == 0:
                within += th[states[:, q], states[:, q + r2], k]
            elif r1 == 1:
                # src in previous row, dst in current row
                between += th[states[:, q][:, None], states[:, q + r2][None, :], k]
            else:
                # src in current row, dst in previous row
                between += th[states[:, q][None, :], states[:, q + r2][:, None], k]

    logv = within.copy()
    for _ in range(n - 1):
        logv = logsumexp(logv[:, None] + between, axis=0) + within
    return float(logsumexp(logv))


def exact_conditional(dims, structure: InteractionStructure,
                      theta: PotentialArray, i: tuple[int, int],
                      boundary: DiscreteField, mask=None) -> np.ndarray:
    """P(Z_i = k | rest fixed at the boundary configuration), computed from
    full-configuration energies (softmax over the C+1 completions)."""
    m = _resolve_mask(dims, mask)
    _check_bound(int(m.sum()), theta.C + 1)
    if boundary.labels.shape != m.shape:
        raise ValueError("boundary configuration dimensions do not match")
    i1, i2 = i
    if not m[i1, i2]:
        raise ValueError(f"pixel {i} is masked")
    pairs_src, pairs_dst, pairs_sl = _pair_arrays(m, structure)
    site_of = np.full(m.shape, -1, dtype=np.int64)
    site_of[m] = np.arange(int(m.sum()))
    base = boundary.labels[m].astype(np.int64)
    target = site_of[i1, i2]
    n_colors = theta.C + 1
    h = np.zeros(n_colors)
    for k in range(n_colors):
        cfg = base.copy()
        cfg[target] = k
        h[k] = float(np.sum(theta.theta[cfg[pairs_src], cfg[pairs_dst], pairs_sl]))
    h -= h.max()
    p = np.exp(h)
    return p / p.sum()


def _moments(v: np.ndarray, s_matrix: np.ndarray):
    h = s_matrix @ v
    logz = logsumexp(h)
    p = np.exp(h - logz)
    mean = p @ s_matrix
    second = s_matrix.T @ (s_matrix * p[:, None])
    cov = second - np.outer(mean, mean)
    return mean, cov


def _stat_matrix(mask: np.ndarray, structure: InteractionStructure,
                 family: str, C: int) -> np.ndarray:
    n_sites = int(mask.sum())
    n_colors = C + 1
    n_configs = _check_bound(n_sites, n_colors)
    dim = family_dim(family, len(structure), C)
    if n_configs * dim > 2 ** 24:
        raise EnumerationBoundError(
            "statistic matrix too large for exact computation")
    pairs = _pair_arrays(mask, structure)
    cls = class_index(family, len(structure), C)
    s = np.empty((n_configs, dim))
    for lo, hi in _chunk_ranges(n_configs):
        digits = _decode(np.arange(lo, hi), n_sites, n_colors)
        s[lo:hi] = _stat_rows(digits, pairs, cls, dim)
    return s


def exact_expected_stats(dims, structure: InteractionStructure,
                         theta: PotentialArray, family: str,
                         mask=None) -> np.ndarray:
    """E_theta[S] by full enumeration; the statistic family may differ from
    theta's own family (energies are computed directly from the tensor)."""
    m = _resolve_mask(dims, mask)
    n_sites = int(m.sum())
    n_colors = theta.C + 1
    n_configs = _check_bound(n_sites, n_colors)
    dim = family_dim(family, len(structure), theta.C)
    pairs = _pair_arrays(m, structure)
    cls = class_index(family, len(structure), theta.C)

    partials = []
    for lo, hi in _chunk_ranges(n_configs):
        digits = _decode(np.arange(lo, hi), n_sites, n_colors)
        partials.append(logsumexp(_energies(digits, pairs, theta.theta)))
    logz = logsumexp(np.array(partials))

    mean = np.zeros(dim)
    for lo, hi in _chunk_ranges(n_configs):
        digits = _decode(np.arange(lo, hi), n_sites, n_colors)
        p = np.exp(_energies(digits, pairs, theta.theta) - logz)
        mean += p @ _stat_rows(digits, pairs, cls, dim)
    return mean


def exact_mle(z: DiscreteField, structure: InteractionStructure, family: str,
              tol: float = 1e-8, max_iter: int = 200) -> np.ndarray:
    """Exact MLE on a toy lattice: Newton iteration for the moment condition
    E_theta[S] = S(z), with the Fisher information Cov_theta(S) as Jacobian.

    Raises MleBoundaryError when S(z) touches the boundary of its
    achievable range (MLE at infinity).
    """
    s_matrix = _stat_matrix(z.mask, structure, family, z.C)
    cls = class_index(family, len(structure), z.C)
    pairs = _pair_arrays(z.mask, structure)
    s0 = _stat_rows(z.labels[z.mask][None, :].astype(np.int64), pairs, cls,
                    s_matrix.shape[1])[0]

    lo, hi = s_matrix.min(axis=0), s_matrix.max(axis=0)
    if np.any(s0 <= lo) or np.any(s0 >= hi):
        raise MleBoundaryError(
            "observed statistic on the boundary of its achievable range; "
            "the MLE diverges")

    v = np.zeros(s_matrix.shape[1])
    for _ in range(max_iter):
        mean, cov = _moments(v, s_matrix)
        g = s0 - mean
        if np.abs(g).max() < tol:
            return v
        try:
            step = np.linalg.solve(cov + 1e-12 * np.eye(cov.shape[0]), g)
        except np.linalg.LinAlgError:
            raise MleBoundaryError("singular Fisher information")
        norm = np.abs(step).max()
        if norm > 1.0:
            step = step / norm
        v = v + step
        if np.abs(v).max() > 30.0:
            raise MleBoundaryError(
                "estimate diverging; statistic effectively on the boundary")
    raise RuntimeError("Newton iteration did not converge")
