"""Gaussian mixtures driven by a hidden MRF: EM with an ICM-based E-step.

The latent discrete field follows the MRF model with fixed potentials
(tuning hyper-parameters); the observed field is Gaussian around a
per-component mean plus an optional spatial fixed effect:

    Y_i | Z_i = a  ~  Normal(mu_a + x_i . beta, sigma_a^2)

Each EM iteration (1) refines the modal latent configuration by Iterated
Conditional Modes, (2) computes pixel-wise component weights conditioned
on that configuration, and (3) updates beta by weighted least squares and
(mu, sigma) by weighted moments.  ICM scans the lattice in raster order
and breaks argmax ties toward the lowest label, so the whole fit is
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .fields import DiscreteField, RealField
from .interactions import InteractionStructure
from .kernel import local_field_tensor
from .potentials import PotentialArray

_SIGMA_FLOOR = 1e-8  # degeneracy guard for collapsing components


@dataclass(frozen=True)
class MixtureParams:
    """Gaussian emission parameters: one (mu, sigma) per component plus the
    fixed-effect coefficients."""

    mu: np.ndarray     # (C+1,)
    sigma: np.ndarray  # (C+1,), positive
    beta: np.ndarray   # (p,)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        beta = np.asarray(self.beta, dtype=np.float64)
        if mu.shape != sigma.shape or mu.ndim != 1:
            raise ValueError("mu and sigma must be 1-D of equal length")
        if (sigma <= 0).any():
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "beta", beta)


@dataclass(frozen=True)
class BasisSet:
    """Spatial covariate columns evaluated on an N x M lattice (row-major
    pixel order).  Never contains a constant column (intercept excluded)."""

    columns: np.ndarray  # (N*M, p)
    dims: tuple[int, int]
    names: tuple[str, ...]

    @property
    def size(self) -> int:
        return self.columns.shape[1]

    def at_mask(self, mask: np.ndarray) -> np.ndarray:
        """Design matrix restricted to unmasked pixels."""
        if mask.shape != self.dims:
            raise ValueError("mask dimensions do not match basis dims")
        return self.columns[mask.ravel()]


def _scaled_coords(dims: tuple[int, int]):
    """Centered pixel coordinates scaled to [-1, 1] (1-based convention:
    pixel rows are 1..N, centered at (N+1)/2)."""
    n, m = dims
    i1 = np.arange(1, n + 1, dtype=np.float64)
    i2 = np.arange(1, m + 1, dtype=np.float64)
    half1 = (n - 1) / 2.0 if n > 1 else 1.0
    half2 = (m - 1) / 2.0 if m > 1 else 1.0
    u = (i1 - (n + 1) / 2.0) / half1
    v = (i2 - (m + 1) / 2.0) / half2
    return np.meshgrid(u, v, indexing="ij")


def polynomial_basis(max_degrees: tuple[int, int],
                     dims: tuple[int, int]) -> BasisSet:
    """All monomials u^e1 * v^e2 with 0 <= e1 <= d1, 0 <= e2 <= d2,
    excluding the constant (0, 0), in centered coordinates scaled to
    [-1, 1]."""
    d1, d2 = int(max_degrees[0]), int(max_degrees[1])
    if d1 < 0 or d2 < 0:
        raise ValueError("degrees must be non-negative")
    if d1 == 0 and d2 == 0:
        raise ValueError("empty basis: both maximum degrees are zero")
    u, v = _scaled_coords(dims)
    cols, names = [], []
    for e1 in range(d1 + 1):
        for e2 in range(d2 + 1):
            if e1 == 0 and e2 == 0:
                continue
            cols.append((u ** e1 * v ** e2).ravel())
            names.append(f"poly_{e1}_{e2}")
    return BasisSet(np.column_stack(cols), (int(dims[0]), int(dims[1])),
                    tuple(names))


def fourier_basis(max_freqs: tuple[int, int],
                  dims: tuple[int, int]) -> BasisSet:
    """sin and cos of 2*pi*(q1*i1/N + q2*i2/M) for every frequency pair
    (q1, q2) <= (k1, k2) except (0, 0); constant or identically-zero
    columns are dropped."""
    k1, k2 = int(max_freqs[0]), int(max_freqs[1])
    if k1 < 0 or k2 < 0:
        raise ValueError("frequencies must be non-negative")
    if k1 == 0 and k2 == 0:
        raise ValueError("empty basis: both maximum frequencies are zero")
    n, m = int(dims[0]), int(dims[1])
    i1 = np.arange(1, n + 1, dtype=np.float64)
    i2 = np.arange(1, m + 1, dtype=np.float64)
    g1, g2 = np.meshgrid(i1, i2, indexing="ij")
    cols, names = [], []
    for q1 in range(k1 + 1):
        for q2 in range(k2 + 1):
            if q1 == 0 and q2 == 0:
                continue
            phase = 2.0 * math.pi * (q1 * g1 / n + q2 * g2 / m)
            for fn, tag in ((np.sin, "sin"), (np.cos, "cos")):
                col = fn(phase).ravel()
                if col.max() - col.min() < 1e-12:
                    continue  # constant or identically zero
                cols.append(col)
                names.append(f"fourier_{tag}_{q1}_{q2}")
    if not cols:
        raise ValueError("empty basis: all columns degenerate")
    return BasisSet(np.column_stack(cols), (n, m), tuple(names))


@dataclass(frozen=True)
class HmrfFit:
    """Result of a hidden-MRF Gaussian mixture fit."""

    params: MixtureParams
    z_pred: DiscreteField       # modal latent configuration (final ICM pass)
    fixed: RealField            # fitted fixed effect x . beta per pixel
    predicted: RealField        # fixed + mu[z_pred]
    iterations: int
    component_counts: np.ndarray
    structure: InteractionStructure
    n_covariates: int


@njit(cache=True)
def _icm_cycles(labels, in_lattice, r1s, r2s, theta, logdens, n_cycles):
    """Raster-order ICM scans: each unmasked pixel takes the label
    maximizing local field + log emission density; lowest label wins ties."""
    n, m = labels.shape
    n_colors = theta.shape[0]
    n_slices = r1s.size
    h = np.empty(n_colors)
    for _ in range(n_cycles):
        for i in range(n):
            for j in range(m):
                if not in_lattice[i, j]:
                    continue
                for c in range(n_colors):
                    h[c] = logdens[i, j, c]
                for k in range(n_slices):
                    ni = i + r1s[k]
                    nj = j + r2s[k]
                    if 0 <= ni < n and 0 <= nj < m and in_lattice[ni, nj]:
                        b = labels[ni, nj]
                        for c in range(n_colors):
                            h[c] += theta[c, b, k]
                    mi = i - r1s[k]
                    mj = j - r2s[k]
                    if 0 <= mi < n and 0 <= mj < m and in_lattice[mi, mj]:
                        a = labels[mi, mj]
                        for c in range(n_colors):
                            h[c] += theta[a, c, k]
                best = h[0]
                best_c = 0
                for c in range(1, n_colors):
                    if h[c] > best:
                        best = h[c]
                        best_c = c
                labels[i, j] = best_c


def _log_normal_pdf(y: np.ndarray, means: np.ndarray,
                    sigma: np.ndarray) -> np.ndarray:
    """(n, C+1) log densities; means is (n, C+1), sigma (C+1,)."""
    var = sigma ** 2
    return (-0.5 * np.log(2.0 * math.pi * var)[None, :]
            - (y[:, None] - means) ** 2 / (2.0 * var)[None, :])


def _independent_em(vals: np.ndarray, mu: np.ndarray, sigma: np.ndarray,
                    maxiter: int = 100, max_dist: float = 1e-3):
    """Independent Gaussian mixture EM with uniform component prior (the
    zero-potential special case of the spatial model)."""
    mu = mu.copy()
    sigma = sigma.copy()
    for _ in range(maxiter):
        logd = _log_normal_pdf(vals, np.broadcast_to(mu, (vals.size, mu.size)),
                               sigma)
        w = _softmax_rows(logd)
        tot = w.sum(axis=0)
        if (tot < 1e-10).any():
            k = int(np.argmin(tot))
            raise RuntimeError(f"mixture component {k} received no weight")
        mu_new = (w * vals[:, None]).sum(axis=0) / tot
        var = (w * (vals[:, None] - mu_new[None, :]) ** 2).sum(axis=0) / tot
        sigma_new = np.maximum(np.sqrt(var), _SIGMA_FLOOR)
        delta = max(np.abs(mu_new - mu).max(), np.abs(sigma_new - sigma).max())
        mu, sigma = mu_new, sigma_new
        if delta < max_dist:
            break
    return mu, sigma


def _softmax_rows(logw: np.ndarray) -> np.ndarray:
    shifted = logw - logw.max(axis=1, keepdims=True)
    w = np.exp(shifted)
    return w / w.sum(axis=1, keepdims=True)


def init_from_quantiles(y: RealField, C: int) -> MixtureParams:
    """Initial mixture parameters: mu at the (2k+1)/(2(C+1)) quantiles,
    sigma = sd(y)/(C+1), then one run of independent-mixture EM to refine.
    beta starts at zero."""
    vals = y.values[y.mask]
    if np.unique(vals).size < 2:
        raise ValueError("constant field: cannot initialize a mixture")
    levels = (2 * np.arange(C + 1) + 1) / (2.0 * (C + 1))
    mu = np.quantile(vals, levels)
    sigma = np.full(C + 1, max(vals.std() / (C + 1), _SIGMA_FLOOR))
    mu, sigma = _independent_em(vals, mu, sigma)
    order = np.argsort(mu, kind="stable")
    return MixtureParams(mu[order], sigma[order], np.zeros(0))


def fit_ghm(y: RealField, structure: InteractionStructure,
            pot: PotentialArray, basis: BasisSet | None = None,
            equal_vars: bool = False, init_mus=None, init_sigmas=None,
            maxiter: int = 100, max_dist: float = 1e-3, icm_cycles: int = 6,
            seed: int = 0) -> HmrfFit:
    """Fit the Gaussian mixture driven by a hidden MRF with fixed latent
    potentials.

    Stops at the first iteration where every |delta mu_k| and
    |delta sigma_k| falls below max_dist, or after maxiter iterations.
    Components are returned sorted by mu ascending.  The `seed` argument is
    accepted for interface stability; the algorithm is deterministic and
    does not consume randomness.
    """
    del seed
    if list(structure.positions) != list(pot.structure.positions):
        raise ValueError("interaction structure does not match potentials")
    n_comp = pot.C + 1
    mask = y.mask
    vals = y.values[mask]
    n_obs = vals.size

    if basis is not None and basis.dims != (y.height, y.width):
        raise ValueError("basis dimensions do not match field")
    x = basis.at_mask(mask) if basis is not None else np.zeros((n_obs, 0))
    p = x.shape[1]

    if init_mus is not None or init_sigmas is not None:
        if init_mus is None or init_sigmas is None:
            raise ValueError("provide both init_mus and init_sigmas or neither")
        mu = np.asarray(init_mus, dtype=np.float64).copy()
        sigma = np.asarray(init_sigmas, dtype=np.float64).copy()
        if mu.size != n_comp or sigma.size != n_comp:
            raise ValueError(f"initial parameters must have length {n_comp}")
        if (sigma <= 0).any():
            raise ValueError("init_sigmas must be positive")
    else:
        start = init_from_quantiles(y, pot.C)
        mu, sigma = start.mu.copy(), start.sigma.copy()
    beta = np.zeros(p)

    r1s = np.array([r[0] for r in structure], dtype=np.int64)
    r2s = np.array([r[1] for r in structure], dtype=np.int64)
    logdens_grid = np.zeros((y.height, y.width, n_comp))

    def emission_logdens(xb: np.ndarray) -> np.ndarray:
        means = mu[None, :] + xb[:, None]
        return _log_normal_pdf(vals, means, sigma)

    # initial modal configuration: independent maximum-density labeling
    xb = x @ beta
    logd = emission_logdens(xb)
    labels = np.zeros(mask.shape, dtype=np.int64)
    labels[mask] = np.argmax(logd, axis=1)

    iterations = 0
    for it in range(1, maxiter + 1):
        iterations = it
        logdens_grid[mask] = logd
        _icm_cycles(labels, mask, r1s, r2s, pot.theta, logdens_grid,
                    icm_cycles)
        h = local_field_tensor(labels, mask, structure, pot.theta)
        w = _softmax_rows(h[mask] + logd)
        tot = w.sum(axis=0)
        if (tot < 1e-10).any():
            k = int(np.argmin(tot))
            raise RuntimeError(
                f"mixture component {k} received no weight (empty component)")

        if p > 0:
            inv_var = 1.0 / sigma ** 2
            wi = w @ inv_var
            ci = (w * (vals[:, None] - mu[None, :])) @ inv_var
            a = x.T @ (x * wi[:, None]) + 1e-10 * np.eye(p)
            beta = np.linalg.solve(a, x.T @ ci)
            xb = x @ beta
        resid = vals - xb
        mu_new = (w * resid[:, None]).sum(axis=0) / tot
        sq = (w * (resid[:, None] - mu_new[None, :]) ** 2).sum(axis=0)
        if equal_vars:
            pooled = math.sqrt(sq.sum() / n_obs)
            sigma_new = np.full(n_comp, max(pooled, _SIGMA_FLOOR))
        else:
            sigma_new = np.maximum(np.sqrt(sq / tot), _SIGMA_FLOOR)

        delta = max(np.abs(mu_new - mu).max(),
                    np.abs(sigma_new - sigma).max())
        mu, sigma = mu_new, sigma_new
        logd = emission_logdens(xb)
        if delta < max_dist:
            break

    # final modal configuration under the converged parameters
    logdens_grid[mask] = logd
    _icm_cycles(labels, mask, r1s, r2s, pot.theta, logdens_grid, icm_cycles)

    # relabel components so mu is ascending
    order = np.argsort(mu, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(n_comp)
    mu, sigma = mu[order], sigma[order]
    labels[mask] = rank[labels[mask]]

    z_pred = DiscreteField(labels, mask, pot.C)
    fixed_grid = np.full(mask.shape, np.nan)
    fixed_grid[mask] = xb
    fixed = RealField(fixed_grid, mask)
    predicted_grid = np.full(mask.shape, np.nan)
    predicted_grid[mask] = fixed_grid[mask] + mu[labels[mask]]
    predicted = RealField(predicted_grid, mask)
    counts = np.bincount(labels[mask], minlength=n_comp)
    return HmrfFit(params=MixtureParams(mu, sigma, beta), z_pred=z_pred,
                   fixed=fixed, predicted=predicted, iterations=iterations,
                   component_counts=counts, structure=structure,
                   n_covariates=p)
