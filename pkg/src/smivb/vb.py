"""Variational-Bayes decomposition of a binned SMI.

Every detected event is attributed to a latent component. The component
frequencies carry a Dirichlet prior with hyperparameters ``alpha0``; the
variational posterior is again Dirichlet, and the loop alternates

* responsibilities: ``ln rho[k, i] = psi(alpha_i) - psi(sum_j alpha_j) + ln I[i, k]``
  normalized over components within each bin,
* hyperparameters: ``alpha_i = sum_k n_k rho[k, i] + alpha0_i``.

:func:`run_vb` evaluates the responsibilities against the row-normalized
basis, so ``I[i, k]`` is the probability that an event from component ``i``
lands in bin ``k`` and the posterior describes the fraction of events
produced by each component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GridMismatchError, WeightDistribution, check_same_grid
from .numerics import digamma, log_normalize_rows


@dataclass(frozen=True, eq=False)
class DirichletState:
    labels: tuple
    alpha: np.ndarray
    alpha0: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        alpha0 = np.asarray(self.alpha0, dtype=np.float64)
        if alpha.shape != (len(self.labels),) or alpha0.shape != alpha.shape:
            raise ValueError("alpha / alpha0 length must match the component labels")
        if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0.0):
            raise ValueError("posterior hyperparameters must be finite and > 0")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "alpha0", alpha0)


@dataclass(frozen=True, eq=False)
class Responsibilities:
    """``rho[k, i]``: probability that an event in bin ``k`` came from component ``i``.

    ``dead_bins`` flags bins where no component has support; their rows are
    zero.
    """

    rho: np.ndarray
    dead_bins: np.ndarray


@dataclass(frozen=True)
class VbReport:
    iterations: int
    converged: bool
    final_delta: float
    posterior: DirichletState


def _prior(alpha0, n_components):
    alpha0 = np.asarray(alpha0, dtype=np.float64)
    if alpha0.ndim == 0:
        alpha0 = np.full(n_components, float(alpha0))
    if alpha0.shape != (n_components,):
        raise ValueError(f"alpha0 must have length {n_components}")
    if not np.all(np.isfinite(alpha0)) or np.any(alpha0 < 0.0):
        raise ValueError("alpha0 must be finite and >= 0")
    return alpha0


def _check_dead(dead, counts):
    if np.any(counts[dead] > 0.0):
        k = int(np.flatnonzero(dead & (counts > 0.0))[0])
        raise ValueError(f"bin {k} has counts but no component has intensity there")


def vb_init(smi, basis, alpha0):
    """Initial Dirichlet state.

    Each bin's counts are split over components in proportion to the
    row-normalized basis ``eta[i, k]`` (a uniform-frequency attribution),
    giving ``alpha_i = sum_k n_k eta[i, k] / sum_j eta[j, k] + alpha0_i``.
    """
    check_same_grid(smi.grid, basis.grid)
    alpha0 = _prior(alpha0, basis.n_components)
    eta = basis.normalized().intensity
    col = eta.sum(axis=0)
    dead = col <= 0.0
    _check_dead(dead, smi.counts)
    share = np.divide(smi.counts, col, out=np.zeros_like(col), where=~dead)
    alpha = eta @ share + alpha0
    if np.any(alpha <= 0.0):
        i = int(np.flatnonzero(alpha <= 0.0)[0])
        raise ValueError(
            f"component {basis.labels[i]!r} has no observed support and a zero prior"
        )
    return DirichletState(basis.labels, alpha, alpha0)


def vb_expectation(state, basis, smi=None):
    """Responsibilities for the current Dirichlet state.

    Uses ``ln basis.intensity`` as given; zero intensities get exactly zero
    responsibility. If ``smi`` is supplied, a bin with counts but no component
    support raises ``ValueError``.
    """
    if state.labels != basis.labels:
        raise GridMismatchError("state and basis components differ")
    expected_log_pi = digamma(state.alpha) - digamma(state.alpha.sum())
    with np.errstate(divide="ignore"):
        log_i = np.log(basis.intensity.T)
    rho, dead = log_normalize_rows(log_i + expected_log_pi[None, :])
    if smi is not None:
        _check_dead(dead, smi.counts)
    return Responsibilities(rho, dead)


def vb_maximization(resp, smi, alpha0, labels=None):
    """Hyperparameter update ``alpha_i = sum_k n_k rho[k, i] + alpha0_i``."""
    rho = resp.rho
    if rho.shape[0] != smi.counts.size:
        raise GridMismatchError("responsibilities and spectrum have different bin counts")
    _check_dead(resp.dead_bins, smi.counts)
    alpha0 = _prior(alpha0, rho.shape[1])
    alpha = smi.counts @ rho + alpha0
    if labels is None:
        labels = tuple(str(i) for i in range(rho.shape[1]))
    return DirichletState(tuple(labels), alpha, alpha0)


def run_vb(smi, basis, alpha0=1.0, max_iter=10_000, tol=1e-9, callback=None):
    """Iterate responsibilities and hyperparameter updates to a fixed point.

    Stops once ``max_i |delta alpha_i| / (N + sum alpha0) < tol`` or after
    ``max_iter`` updates; ``tol=0`` always runs the full ``max_iter``.
    ``callback(iteration, state, resp)`` is invoked after every update.
    """
    if int(max_iter) < 1:
        raise ValueError("max_iter must be >= 1")
    if not tol >= 0.0:
        raise ValueError("tol must be >= 0")
    eta = basis.normalized()
    state = vb_init(smi, basis, alpha0)
    scale = smi.total + state.alpha0.sum()

    delta = np.inf
    converged = False
    it = 0
    for it in range(1, int(max_iter) + 1):
        resp = vb_expectation(state, eta, smi)
        new = vb_maximization(resp, smi, state.alpha0, basis.labels)
        delta = float(np.max(np.abs(new.alpha - state.alpha)) / scale)
        state = new
        if callback is not None:
            callback(it, state, resp)
        if delta < tol:
            converged = True
            break
    return VbReport(it, converged, delta, state)


def posterior_mean(state):
    """Dirichlet mean ``alpha_i / sum_j alpha_j``."""
    return WeightDistribution(state.labels, state.alpha / state.alpha.sum())
