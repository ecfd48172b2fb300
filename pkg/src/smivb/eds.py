"""Compound identification from inferred element weights, and its scoring."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import Smi, WeightDistribution, superpose


@dataclass(frozen=True)
class IdentificationResult:
    predicted: frozenset
    truth: frozenset

    @property
    def correct(self):
        return self.predicted == self.truth


class Score(NamedTuple):
    correct: int
    total: int

    def __str__(self):
        return f"{self.correct}/{self.total}"

    @property
    def accuracy(self):
        return self.correct / self.total


@dataclass(frozen=True)
class Compound:
    name: str
    formula: tuple  # ((label, ratio), ...)
    k: int

    @property
    def elements(self):
        return frozenset(label for label, _ in self.formula)


def identify_elements(weights, k):
    """Labels of the ``k`` largest raw weights; ties go to the smaller label."""
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(weights.labels):
        raise ValueError(f"k={k} exceeds the {len(weights.labels)} available components")
    order = sorted(zip(weights.labels, weights.w.tolist()), key=lambda lw: (-lw[1], lw[0]))
    return frozenset(label for label, _ in order[:k])


def score_identifications(results):
    results = list(results)
    if not results:
        raise ValueError("no identification results to score")
    return Score(sum(r.correct for r in results), len(results))


def make_compound_spectrum(basis, formula, events, noise, seed):
    """Simulated EDS spectrum of a compound.

    Ratios are normalized into superposition weights, ``events`` detections
    are sampled from the resulting spectrum, and non-negative background noise
    (Gaussian with standard deviation ``noise * max_k expected_k``, clamped at
    zero) is added to every channel.
    """
    if noise < 0.0:
        raise ValueError("noise must be >= 0")
    events = int(events)
    if events <= 0:
        raise ValueError("events must be a positive integer")
    w = np.zeros(basis.n_components)
    for label, ratio in formula:
        if ratio <= 0:
            raise ValueError(f"ratio for {label!r} must be > 0")
        w[basis.index(label)] += float(ratio)
    if not w.any():
        raise ValueError("empty formula")
    p = superpose(basis, WeightDistribution(basis.labels, w / w.sum()))
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(events, p / p.sum()).astype(np.float64)
    if noise > 0.0:
        sigma = noise * events * p.max()
        counts += np.maximum(rng.normal(0.0, sigma, size=counts.size), 0.0)
    return Smi(basis.grid, counts)


def synth_compounds(labels, n_compounds=10, seed=0, min_elements=2, max_elements=4):
    """Random compounds of 2-4 distinct elements with small integer ratios."""
    labels = list(labels)
    rng = np.random.default_rng(seed)
    out = []
    for j in range(int(n_compounds)):
        size = int(rng.integers(min_elements, max_elements + 1))
        chosen = sorted(rng.choice(len(labels), size=size, replace=False).tolist())
        ratios = rng.integers(1, 4, size=size).tolist()
        formula = tuple((labels[c], int(r)) for c, r in zip(chosen, ratios))
        out.append(Compound(f"C{j:02d}", formula, size))
    return out
