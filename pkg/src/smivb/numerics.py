"""Special functions and numerically safe primitives."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats


class DomainError(ValueError):
    """Argument outside the domain of a function."""


# Bernoulli-number coefficients B_{2k} / (2k) for the asymptotic series
#   psi(x) ~ ln x - 1/(2x) - sum_k B_{2k} / (2k x^{2k})
_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_SHIFT_TO = 6.0


def positive(x, name="x"):
    """Return ``x`` as float after checking it is finite and strictly positive."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} must be finite and > 0, got {x!r}")
    return x


def digamma(x):
    """Digamma function for positive real arguments.

    Arguments below 6 are shifted upward with ``psi(x) = psi(x + 1) - 1/x``;
    the asymptotic expansion through ``x**-14`` is then evaluated.

    Parameters
    ----------
    x : float or array_like
        Strictly positive, finite argument(s).

    Returns
    -------
    float or numpy.ndarray
        ``psi(x)``, a Python float for scalar input.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("digamma requires finite arguments > 0")

    z = arr.copy()
    acc = np.zeros_like(z)
    # at most ceil(6 - x) shifts, so at most 6 passes for x > 0
    low = z < _SHIFT_TO
    while np.any(low):
        acc[low] -= 1.0 / z[low]
        z[low] += 1.0
        low = z < _SHIFT_TO

    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for coef in reversed(_ASYMPTOTIC):
        series = (series + coef) * inv2
    out = acc + np.log(z) - 0.5 / z - series

    if np.ndim(x) == 0:
        return float(out)
    return out


def log_sum_exp(v):
    """Compute ``ln(sum(exp(v)))`` without overflow.

    ``-inf`` entries contribute nothing; an all ``-inf`` input gives ``-inf``.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("log_sum_exp of an empty vector")
    if np.any(np.isnan(v)) or np.any(v == np.inf):
        raise ValueError("log_sum_exp input contains NaN or +inf")
    top = v.max()
    if top == -np.inf:
        return -np.inf
    return float(top + np.log(np.sum(np.exp(v - top))))


def log_normalize_rows(logits):
    """Row-wise softmax of a 2-D array of log weights.

    Returns ``(probs, dead)`` where ``dead`` flags rows whose entries are all
    ``-inf``; those rows are returned as zeros.
    """
    logits = np.asarray(logits, dtype=np.float64)
    top = logits.max(axis=1, keepdims=True)
    dead = ~np.isfinite(top[:, 0])
    top[dead] = 0.0
    with np.errstate(invalid="ignore"):
        w = np.exp(logits - top)
    w[dead] = 0.0
    total = w.sum(axis=1, keepdims=True)
    total[dead] = 1.0
    return w / total, dead


def gamma_pdf(x, shape, scale):
    """Gamma density with the given shape and scale.

    Evaluated with :func:`scipy.stats.gamma.pdf` after validating parameters.
    """
    positive(shape, "shape")
    positive(scale, "scale")
    xs = np.asarray(x, dtype=np.float64)
    if np.any(xs < 0.0):
        raise DomainError("gamma_pdf requires x >= 0")
    out = stats.gamma.pdf(xs, shape, scale=scale)
    if np.ndim(x) == 0:
        return float(out)
    return out
