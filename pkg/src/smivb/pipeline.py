"""Estimator dispatch and evaluation metrics shared by the CLI and tests."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baselines, eds, vb
from .model import GridMismatchError, WeightDistribution

METHODS = ("vb", "ml", "svd")


@dataclass
class Estimate:
    method: str
    weights: WeightDistribution
    iterations: int = 0
    converged: bool = True
    final_delta: float = 0.0
    extras: dict = field(default_factory=dict)


def estimate(method, smi, basis, alpha0=1.0, max_iter=10_000, tol=1e-9):
    """Run one estimator. All weights are component frequencies.

    ``vb`` and ``ml`` work on the row-normalized basis directly. ``svd`` is
    solved against the row-normalized basis and divided by the total count so
    its (unconstrained) weights are on the same scale.
    """
    if method == "vb":
        rep = vb.run_vb(smi, basis, alpha0, max_iter=max_iter, tol=tol)
        return Estimate(
            "vb",
            vb.posterior_mean(rep.posterior),
            rep.iterations,
            rep.converged,
            rep.final_delta,
            {"alpha": rep.posterior.alpha},
        )
    if method == "ml":
        rep = baselines.em_ml(smi, basis, max_iter=max_iter, tol=tol)
        trace = rep.log_likelihood_trace
        delta = 0.0
        if trace.size > 1:
            delta = abs(trace[-1] - trace[-2]) / abs(trace[-2])
        return Estimate(
            "ml", rep.weights, rep.iterations, rep.converged, float(delta), {"trace": trace}
        )
    if method == "svd":
        raw = baselines.svd_pinv_weights(smi, basis.normalized())
        total = smi.total
        w = raw.w / total if total > 0 else raw.w
        weights = WeightDistribution(basis.labels, w, unconstrained=True)
        return Estimate("svd", weights, extras={"negative_count": int(np.sum(w < 0.0))})
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def total_variation(w):
    return float(np.abs(np.diff(np.asarray(w, dtype=np.float64))).sum())


def sas_metrics(truth, inferred):
    """L1 / L2 distance and the total variation of both weight vectors."""
    if tuple(truth.labels) != tuple(inferred.labels):
        raise GridMismatchError("truth and inferred weights use different radius grids")
    diff = inferred.w - truth.w
    return {
        "l1": float(np.abs(diff).sum()),
        "l2": float(np.sqrt(np.sum(diff * diff))),
        "tv_truth": total_variation(truth.w),
        "tv_inferred": total_variation(inferred.w),
    }


@dataclass(frozen=True)
class EdsTrial:
    compound: str
    seed: int
    result: eds.IdentificationResult


def _eds_trial(args):
    basis, compound, index, seed, method, events, noise, alpha0, max_iter, tol = args
    smi = eds.make_compound_spectrum(basis, compound.formula, events, noise, (seed, index))
    est = estimate(method, smi, basis, alpha0=alpha0, max_iter=max_iter, tol=tol)
    predicted = eds.identify_elements(est.weights, compound.k)
    return EdsTrial(
        compound.name, seed, eds.IdentificationResult(predicted, compound.elements)
    )


def evaluate_eds(
    basis,
    compounds,
    method,
    seeds,
    events=10_000,
    noise=0.0,
    alpha0=1.0,
    max_iter=100,
    tol=0.0,
    jobs=1,
):
    """Synthesize, infer and identify every (compound, seed) pair.

    Trials are returned compound-major in input order regardless of ``jobs``.
    Spectrum noise for compound ``j`` and seed ``s`` is drawn from the stream
    seeded by ``(s, j)``.
    """
    compounds = list(compounds)
    if not compounds:
        raise ValueError("no compounds to evaluate")
    for c in compounds:
        missing = c.elements - set(basis.labels)
        if missing:
            raise ValueError(f"compound {c.name}: unknown labels {sorted(missing)}")
        if c.k > basis.n_components:
            raise ValueError(f"compound {c.name}: k={c.k} exceeds the number of components")
    tasks = [
        (basis, c, j, int(s), method, events, noise, alpha0, max_iter, tol)
        for j, c in enumerate(compounds)
        for s in seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_eds_trial, tasks))
    return [_eds_trial(t) for t in tasks]
