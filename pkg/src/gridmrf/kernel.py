"""Core model quantities: energy, local fields, conditional probabilities,
co-occurrence counts, sufficient statistics, pseudo-likelihood.

Everything here is a pure function of immutable inputs.  Pairs are counted
under a free boundary condition: a pair contributes only when both
endpoints are inside the lattice (in bounds and unmasked); there is no
wraparound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .fields import DiscreteField
from .interactions import InteractionStructure
from .potentials import PotentialArray, class_index, expand_array, family_dim


@dataclass(frozen=True)
class CooccurrenceHistogram:
    """Pair counts n[a, b, k]: occurrences of the value pair (a, b) over
    pixel pairs with relative position structure.positions[k]."""

    counts: np.ndarray  # (C+1, C+1, |R|) int64
    structure: InteractionStructure
    C: int


@dataclass(frozen=True)
class SufficientStatistics:
    """Family-aggregated co-occurrence counts, aligned with the family's
    free-parameter vector (the pinned classes are dropped)."""

    values: np.ndarray  # float64, length = family_dim
    family: str
    structure: InteractionStructure
    C: int


def _pair_windows(shape: tuple[int, int], r1: int, r2: int):
    """Index windows (src, dst) such that src + (r1, r2) = dst, both in
    bounds.  Returns None when the offset exceeds the grid."""
    n, m = shape
    i0, i1 = max(0, -r1), n - max(0, r1)
    j0, j1 = max(0, -r2), m - max(0, r2)
    if i0 >= i1 or j0 >= j1:
        return None
    src = (slice(i0, i1), slice(j0, j1))
    dst = (slice(i0 + r1, i1 + r1), slice(j0 + r2, j1 + r2))
    return src, dst


def cohist(z: DiscreteField, structure: InteractionStructure,
           C: int | None = None) -> CooccurrenceHistogram:
    """Co-occurrence histogram of an observed field."""
    c = z.C if C is None else C
    if int(z.labels[z.mask].max()) > c:
        raise ValueError("field contains a label exceeding C")
    n_colors = c + 1
    counts = np.zeros((n_colors, n_colors, len(structure)), dtype=np.int64)
    for k, (r1, r2) in enumerate(structure):
        win = _pair_windows(z.labels.shape, r1, r2)
        if win is None:
            continue
        src, dst = win
        valid = z.mask[src] & z.mask[dst]
        a = z.labels[src][valid]
        b = z.labels[dst][valid]
        flat = np.bincount(a * n_colors + b, minlength=n_colors * n_colors)
        counts[:, :, k] = flat.reshape(n_colors, n_colors)
    return CooccurrenceHistogram(counts, structure, c)


def suff_stat(z: DiscreteField, structure: InteractionStructure, family: str,
              C: int | None = None) -> SufficientStatistics:
    """Sufficient statistic vector: co-occurrence counts aggregated over the
    family's equality classes, (0,0)-class and other pinned classes dropped."""
    c = z.C if C is None else C
    hist = cohist(z, structure, c)
    values = aggregate_counts(hist.counts, family, len(structure), c)
    return SufficientStatistics(values, family, structure, c)


def aggregate_counts(counts: np.ndarray, family: str, n_positions: int,
                     C: int) -> np.ndarray:
    """Sum a (C+1, C+1, |R|) tensor over each family equality class."""
    cls = class_index(family, n_positions, C)
    dim = family_dim(family, n_positions, C)
    sel = cls >= 0
    return np.bincount(cls[sel], weights=counts[sel].astype(np.float64),
                       minlength=dim)


def _check_compat(z: DiscreteField, pot: PotentialArray) -> None:
    if z.C != pot.C:
        raise ValueError(
            f"C mismatch: field has C={z.C}, potentials have C={pot.C} "
            "(use a '#C=' header to widen the field's color range)")


def energy(z: DiscreteField, pot: PotentialArray) -> float:
    """H(z, theta) = sum over pairs of theta at the observed value pairs,
    computed through the co-occurrence counts."""
    _check_compat(z, pot)
    hist = cohist(z, pot.structure, pot.C)
    return float(np.sum(hist.counts * pot.theta))


def local_field_tensor(labels: np.ndarray, mask: np.ndarray,
                       structure: InteractionStructure,
                       theta: np.ndarray) -> np.ndarray:
    """h[i1, i2, k]: energy contribution of assigning value k to each pixel
    given the rest of the field.  Entries at masked pixels are meaningless.
    """
    n_colors = theta.shape[0]
    h = np.zeros(labels.shape + (n_colors,))
    for k, (r1, r2) in enumerate(structure):
        win = _pair_windows(labels.shape, r1, r2)
        if win is None:
            continue
        src, dst = win
        t = theta[:, :, k]
        valid = mask[src] & mask[dst]
        # pixel at src interacts forward: theta[c, z[dst]]
        h_src = h[src]
        h_src[valid] += t[:, labels[dst][valid]].T
        # pixel at dst interacts backward: theta[z[src], c]
        h_dst = h[dst]
        h_dst[valid] += t[labels[src][valid], :]
    return h


def local_field(z: DiscreteField, i: tuple[int, int],
                pot: PotentialArray) -> np.ndarray:
    """h_i(k): vector of length C+1 for a single pixel i = (row, col),
    0-based.  Depends only on i's neighbors, not on z at i itself."""
    _check_compat(z, pot)
    i1, i2 = i
    n, m = z.labels.shape
    if not (0 <= i1 < n and 0 <= i2 < m):
        raise IndexError(f"pixel {i} out of bounds for {n}x{m} field")
    if not z.mask[i1, i2]:
        raise ValueError(f"pixel {i} is masked")
    h = np.zeros(pot.C + 1)
    for k, (r1, r2) in enumerate(pot.structure):
        ni, nj = i1 + r1, i2 + r2
        if 0 <= ni < n and 0 <= nj < m and z.mask[ni, nj]:
            h += pot.theta[:, z.labels[ni, nj], k]
        mi, mj = i1 - r1, i2 - r2
        if 0 <= mi < n and 0 <= mj < m and z.mask[mi, mj]:
            h += pot.theta[z.labels[mi, mj], :, k]
    return h


def conditional_probs(z: DiscreteField, i: tuple[int, int],
                      pot: PotentialArray) -> np.ndarray:
    """P(Z_i = k | rest of the field): softmax of the local field, computed
    with max subtraction."""
    h = local_field(z, i, pot)
    h = h - h.max()
    p = np.exp(h)
    return p / p.sum()


def pseudo_likelihood(z: DiscreteField, pot: PotentialArray) -> float:
    """Log pseudo-likelihood: sum over unmasked pixels of the log
    conditional probability of the observed value."""
    _check_compat(z, pot)
    h = local_field_tensor(z.labels, z.mask, pot.structure, pot.theta)
    lse = logsumexp(h, axis=2)
    picked = np.take_along_axis(h, z.labels[:, :, None], axis=2)[:, :, 0]
    return float((picked - lse)[z.mask].sum())


def _softmax_last(h: np.ndarray) -> np.ndarray:
    shifted = h - h.max(axis=-1, keepdims=True)
    p = np.exp(shifted)
    return p / p.sum(axis=-1, keepdims=True)


def pl_gradient(z: DiscreteField, theta_vec: np.ndarray, family: str,
                structure: InteractionStructure, C: int) -> np.ndarray:
    """Analytic gradient of the log pseudo-likelihood with respect to the
    family's free parameters (logistic-regression form).

    d logPL / d theta[a,b,k] = 2 n[a,b,k]
        - sum over ordered pairs of p_i(a) 1{z_j = b} + 1{z_i = a} p_j(b),
    then summed over each family class.
    """
    pot = expand_array(theta_vec, family, structure, C)
    if int(z.labels[z.mask].max()) > C:
        raise ValueError("field contains a label exceeding C")
    labels, mask = z.labels, z.mask
    h = local_field_tensor(labels, mask, structure, pot.theta)
    p = _softmax_last(h)
    n_colors = C + 1
    grad_tensor = 2.0 * cohist(z, structure, C).counts.astype(np.float64)
    for k, (r1, r2) in enumerate(structure):
        win = _pair_windows(labels.shape, r1, r2)
        if win is None:
            continue
        src, dst = win
        valid = mask[src] & mask[dst]
        p_src = p[src][valid]
        p_dst = p[dst][valid]
        z_src = labels[src][valid]
        z_dst = labels[dst][valid]
        model = np.zeros((n_colors, n_colors))
        for v in range(n_colors):
            sel_b = z_dst == v
            if sel_b.any():
                model[:, v] += p_src[sel_b].sum(axis=0)
            sel_a = z_src == v
            if sel_a.any():
                model[v, :] += p_dst[sel_a].sum(axis=0)
        grad_tensor[:, :, k] -= model
    return aggregate_counts(grad_tensor, family, len(structure), C)
