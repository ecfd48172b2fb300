"""Comparison estimators: maximum-likelihood EM and the SVD pseudoinverse."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import WeightDistribution, check_same_grid, superpose


@dataclass(frozen=True)
class EmReport:
    iterations: int
    log_likelihood_trace: np.ndarray
    weights: WeightDistribution
    converged: bool = False


def _binned_loglik(counts, p):
    seen = counts > 0.0
    with np.errstate(divide="ignore"):
        return float(np.sum(counts[seen] * np.log(p[seen])))


def em_ml(smi, basis, max_iter=10_000, tol=0.0):
    """Maximum-likelihood component frequencies by EM on the binned mixture.

    The model is ``p_k = sum_i w_i eta[i, k]`` with ``eta`` the row-normalized
    basis; weights start uniform. Each iteration performs the E-step
    ``r[k, i] ~ w_i eta[i, k]`` and M-step ``w_i = sum_k n_k r[k, i] / N`` and
    records the log-likelihood of the updated weights. Iteration stops after
    ``max_iter`` steps or once the relative likelihood change drops below
    ``tol`` (``tol=0`` disables the check).
    """
    check_same_grid(smi.grid, basis.grid)
    n = smi.counts
    total = n.sum()
    if total <= 0.0:
        raise ValueError("spectrum has no counts")
    if int(max_iter) < 1:
        raise ValueError("max_iter must be >= 1")
    eta = basis.normalized().intensity
    dead = eta.sum(axis=0) <= 0.0
    if np.any(n[dead] > 0.0):
        raise ValueError("a bin with counts has no component support")

    w = np.full(basis.n_components, 1.0 / basis.n_components)
    seen = n > 0.0
    n_seen = n[seen]
    eta_seen = eta[:, seen]
    trace = []
    converged = False
    it = 0
    for it in range(1, int(max_iter) + 1):
        p = w @ eta_seen
        w = w * (eta_seen @ (n_seen / p)) / total
        w /= w.sum()
        ll = float(np.sum(n_seen * np.log(w @ eta_seen)))
        if trace and tol > 0.0 and abs(ll - trace[-1]) <= tol * abs(trace[-1]):
            trace.append(ll)
            converged = True
            break
        trace.append(ll)
    return EmReport(it, np.asarray(trace), WeightDistribution(basis.labels, w), converged)


def svd_pinv_weights(smi, basis, rcond=1e-12):
    """Minimum-norm least-squares weights ``a`` with ``S_k ~ sum_i a_i I[i, k]``.

    The Moore-Penrose pseudoinverse of the basis is formed from its SVD with
    singular values below ``rcond * sigma_max`` discarded. The result is not
    constrained to be non-negative.
    """
    check_same_grid(smi.grid, basis.grid)
    mat = basis.intensity
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        raise ValueError("degenerate (all-zero) basis")
    keep = s > rcond * s[0]
    # a = S pinv(I), pinv(I) = V_r diag(1/s_r) U_r^T
    a = ((smi.counts @ vt[keep].T) / s[keep]) @ u[:, keep].T
    return WeightDistribution(basis.labels, a, unconstrained=True)


def log_likelihood(smi, basis, weights):
    """``sum_k n_k ln p_k`` with ``p = superpose(basis, weights)``.

    Empty bins contribute nothing; a bin with counts but ``p_k = 0`` gives
    ``-inf``.
    """
    check_same_grid(smi.grid, basis.grid)
    return _binned_loglik(smi.counts, superpose(basis, weights))
