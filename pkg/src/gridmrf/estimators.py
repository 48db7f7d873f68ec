"""Parameter estimation: maximum pseudo-likelihood and stochastic
approximation to the maximum-likelihood estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .fields import DiscreteField
from .interactions import InteractionStructure
from .kernel import pl_gradient, pseudo_likelihood, suff_stat
from .potentials import PotentialArray, expand_array, family_dim, summarize_array
from .rng import derive_seed
from .sampler import GibbsChain


class FitError(RuntimeError):
    """Estimation failure; carries the partial fit when one exists."""

    def __init__(self, message: str, partial: "MrfFit | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class MrfFit:
    """Result of an MRF parameter fit."""

    theta: PotentialArray
    family: str
    structure: InteractionStructure
    method: str                      # "PL" or "SA"
    color_counts: np.ndarray
    dims: tuple[int, int]
    log_pl: float | None = None
    metrics: tuple = field(default_factory=tuple)  # (iteration, distance)

    @property
    def theta_vec(self) -> np.ndarray:
        return summarize_array(self.theta)


def _resolve_init(init, family: str, structure: InteractionStructure,
                  C: int) -> np.ndarray:
    if init is None or (np.isscalar(init) and init == 0):
        return np.zeros(family_dim(family, len(structure), C))
    if isinstance(init, PotentialArray):
        if init.family != family or init.C != C or \
                list(init.structure.positions) != list(structure.positions):
            raise ValueError("init does not match family/structure/C")
        return summarize_array(init)
    return np.asarray(init, dtype=np.float64).ravel()


def fit_pl(z: DiscreteField, structure: InteractionStructure, family: str,
           init: PotentialArray | None = None, gtol: float = 1e-5,
           maxiter: int = 500) -> MrfFit:
    """Maximum pseudo-likelihood estimate.

    Maximizes the log pseudo-likelihood with a quasi-Newton method
    (L-BFGS-B) driven by the analytic gradient; the objective is smooth and
    concave in this parameterization, so the stationary point found (PL
    gradient inf-norm <= gtol) is the maximizer.  Deterministic given the
    inputs.
    """
    counts = z.color_counts()
    if np.count_nonzero(counts) < 2:
        raise FitError(
            "field has a single color: pseudo-likelihood has no contrast")
    v0 = _resolve_init(init, family, structure, z.C)
    dim = family_dim(family, len(structure), z.C)
    if v0.size != dim:
        raise ValueError(f"init has {v0.size} parameters, expected {dim}")

    def objective(v):
        pot = expand_array(v, family, structure, z.C)
        value = pseudo_likelihood(z, pot)
        grad = pl_gradient(z, v, family, structure, z.C)
        return -value, -grad

    res = minimize(objective, v0, jac=True, method="L-BFGS-B",
                   options={"maxiter": maxiter, "gtol": gtol, "ftol": 1e-16})
    # L-BFGS-B can stall a hair above gtol when the objective is flat to
    # machine precision; a few Newton steps on the analytic gradient finish
    # the job (the PL is concave, so this converges quadratically)
    v, grad = _newton_polish(
        res.x, lambda v: pl_gradient(z, v, family, structure, z.C), gtol)
    theta = expand_array(v, family, structure, z.C)
    fit = MrfFit(theta=theta, family=family, structure=structure,
                 method="PL", color_counts=counts,
                 dims=(z.height, z.width),
                 log_pl=pseudo_likelihood(z, theta))
    if np.abs(grad).max() > gtol:
        raise FitError(
            f"PL optimization stopped with gradient inf-norm "
            f"{np.abs(grad).max():.2e} > gtol={gtol} "
            f"({res.message}); partial fit attached", partial=fit)
    return fit


def _newton_polish(v: np.ndarray, grad_fn, gtol: float,
                   max_steps: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Newton steps with a finite-difference Jacobian of the gradient."""
    v = v.copy()
    grad = grad_fn(v)
    for _ in range(max_steps):
        if np.abs(grad).max() <= gtol:
            break
        hess = _fd_jacobian(grad_fn, v)
        try:
            step = np.linalg.solve(-hess + 1e-9 * np.eye(v.size), grad)
        except np.linalg.LinAlgError:
            break
        norm = np.abs(step).max()
        if norm > 0.5:
            step *= 0.5 / norm
        v = v + step
        grad = grad_fn(v)
    return v, grad


def _fd_jacobian(grad_fn, v: np.ndarray, h: float = 1e-6) -> np.ndarray:
    jac = np.empty((v.size, v.size))
    for m in range(v.size):
        vp, vm = v.copy(), v.copy()
        vp[m] += h
        vm[m] -= h
        jac[:, m] = (grad_fn(vp) - grad_fn(vm)) / (2 * h)
    return (jac + jac.T) / 2.0


def default_gamma_sequence(m_init: float = 1.0, n_steps: int = 300) -> np.ndarray:
    """Linearly decaying step sizes from m_init to 0 over n_steps."""
    return np.linspace(m_init, 0.0, n_steps)


def fit_sa(z: DiscreteField, structure: InteractionStructure, family: str,
           gamma_seq, init: PotentialArray | None = None, cycles: int = 2,
           refresh_each: int | None = None, refresh_cycles: int = 60,
           seed: int = 0) -> MrfFit:
    """Stochastic approximation to the MLE.

    Iterates theta <- theta + gamma_t/n_sites * (S(data) - S(chain)), where
    the chain is advanced `cycles` Gibbs cycles per iteration under the
    current theta, starting from the data.  Every `refresh_each` iterations
    the chain restarts from an i.i.d. uniform configuration and runs
    `refresh_cycles` cycles instead (never, by default).  metrics records
    the Euclidean distance between the data statistic and the chain
    statistic at each iteration.
    """
    gamma = np.asarray(gamma_seq, dtype=np.float64).ravel()
    if gamma.size == 0:
        raise ValueError("gamma_seq is empty")
    if (gamma < 0).any():
        raise ValueError("gamma_seq must be nonnegative")
    v = _resolve_init(init, family, structure, z.C)
    dim = family_dim(family, len(structure), z.C)
    if v.size != dim:
        raise ValueError(f"init has {v.size} parameters, expected {dim}")

    s0 = suff_stat(z, structure, family).values
    n_sites = z.n_sites
    chain = GibbsChain(DiscreteField(z.labels, z.mask, z.C), structure,
                       derive_seed(seed, "sa-chain"))
    metrics = []
    for t, g in enumerate(gamma, start=1):
        theta = expand_array(v, family, structure, z.C).theta
        if refresh_each is not None and t % refresh_each == 0:
            chain.reinitialize_uniform()
            chain.run(theta, refresh_cycles)
        else:
            chain.run(theta, cycles)
        s_t = suff_stat(chain.field(), structure, family).values
        diff = s0 - s_t
        metrics.append((t, float(np.linalg.norm(diff))))
        v = v + (g / n_sites) * diff

    theta = expand_array(v, family, structure, z.C)
    return MrfFit(theta=theta, family=family, structure=structure,
                  method="SA", color_counts=z.color_counts(),
                  dims=(z.height, z.width), log_pl=None,
                  metrics=tuple(metrics))


def select_interactions(z: DiscreteField, candidates: InteractionStructure,
                        family: str, threshold: float,
                        gamma_seq=None, cycles: int = 2,
                        refresh_each: int | None = None,
                        refresh_cycles: int = 60,
                        seed: int = 0) -> InteractionStructure:
    """Naive interaction selection: run stochastic approximation over a
    candidate structure and keep the positions whose free-parameter block
    has max absolute value strictly greater than the threshold."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if gamma_seq is None:
        gamma_seq = default_gamma_sequence()
    fit = fit_sa(z, candidates, family, gamma_seq, cycles=cycles,
                 refresh_each=refresh_each, refresh_cycles=refresh_cycles,
                 seed=seed)
    scores = position_scores(fit)
    keep = [k + 1 for k, s in enumerate(scores) if s > threshold]
    if not keep:
        raise FitError(
            f"no interactions survive threshold {threshold}", partial=fit)
    return candidates.subset(keep)


def position_scores(fit: MrfFit) -> np.ndarray:
    """Per-position max absolute potential over the position's
    free-parameter block (onepar: the single shared value everywhere)."""
    vec = np.abs(fit.theta_vec)
    n_pos = len(fit.structure)
    if fit.family == "onepar":
        return np.full(n_pos, vec[0])
    per_pos = vec.reshape(n_pos, -1)
    return per_pos.max(axis=1)
