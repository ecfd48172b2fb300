"""Domain types, forward models and the detection-event simulator.

A superimposed multispectral intensity (SMI) is a histogram of detection
events over a wave grid. Each known component ``i`` has a spectrum
``intensity[i, k]`` over the grid; the observed histogram is a weighted
superposition of those spectra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import DomainError, gamma_pdf, positive


class GridMismatchError(ValueError):
    """Two objects that must share a wave grid or component set do not."""


def _as_vector(values, name):
    arr = np.array(values, dtype=np.float64, ndmin=1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WaveGrid:
    """Strictly ascending, strictly positive wavenumber axis."""

    q: np.ndarray

    def __post_init__(self):
        q = _as_vector(self.q, "q")
        if q.size < 1:
            raise ValueError("wave grid needs at least one point")
        if not np.all(np.isfinite(q)) or np.any(q <= 0.0):
            raise ValueError("wave grid values must be finite and > 0")
        if np.any(np.diff(q) <= 0.0):
            raise ValueError("wave grid must be strictly ascending")
        object.__setattr__(self, "q", q)

    def __len__(self):
        return self.q.size

    def __eq__(self, other):
        return isinstance(other, WaveGrid) and np.array_equal(self.q, other.q)

    __hash__ = None

    @classmethod
    def linear(cls, q_min, q_max, count):
        return cls(np.linspace(q_min, q_max, count))


def _check_labels(labels):
    labels = tuple(str(s) for s in labels)
    if not labels:
        raise ValueError("at least one component label is required")
    if len(set(labels)) != len(labels):
        raise ValueError("component labels must be unique")
    return labels


def radius_labels(radii):
    """Labels for numeric components (shortest round-trip float repr)."""
    radii = np.asarray(radii, dtype=np.float64)
    if np.any(radii <= 0.0) or np.any(np.diff(radii) <= 0.0):
        raise ValueError("radii must be positive and strictly ascending")
    return tuple(repr(float(r)) for r in radii)


def radius_grid(step=0.2, count=300):
    """Radii ``step, 2*step, ..., count*step``; r = 0 is excluded."""
    return np.round(np.arange(1, count + 1) * step, 10)


@dataclass(frozen=True, eq=False)
class ComponentBasis:
    """Known component spectra, one row per component."""

    grid: WaveGrid
    labels: tuple
    intensity: np.ndarray

    def __post_init__(self):
        labels = _check_labels(self.labels)
        mat = np.array(self.intensity, dtype=np.float64, ndmin=2)
        if mat.shape != (len(labels), len(self.grid)):
            raise ValueError(
                f"intensity shape {mat.shape} does not match "
                f"{len(labels)} components x {len(self.grid)} grid points"
            )
        if not np.all(np.isfinite(mat)) or np.any(mat < 0.0):
            raise ValueError("intensities must be finite and >= 0")
        if np.any(mat.sum(axis=1) <= 0.0):
            raise ValueError("every component needs a positive intensity somewhere")
        mat.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "intensity", mat)

    @property
    def n_components(self):
        return len(self.labels)

    @property
    def radii(self):
        """Component labels parsed as floats (SAS bases)."""
        return np.array([float(s) for s in self.labels])

    def normalized(self):
        """Row-normalized copy: each component becomes a probability over bins."""
        eta = self.intensity / self.intensity.sum(axis=1, keepdims=True)
        return ComponentBasis(self.grid, self.labels, eta)

    def index(self, label):
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown component label {label!r}") from None


@dataclass(frozen=True, eq=False)
class Smi:
    """Binned detection counts over a wave grid."""

    grid: WaveGrid
    counts: np.ndarray

    def __post_init__(self):
        counts = _as_vector(self.counts, "counts")
        if counts.size != len(self.grid):
            raise ValueError("counts length does not match the wave grid")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0.0):
            raise ValueError("counts must be finite and >= 0")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return float(self.counts.sum())


@dataclass(frozen=True, eq=False)
class WeightDistribution:
    """Component weights. Simplex-valued unless ``unconstrained`` is set."""

    labels: tuple
    w: np.ndarray
    unconstrained: bool = field(default=False)

    def __post_init__(self):
        labels = _check_labels(self.labels)
        w = _as_vector(self.w, "w")
        if w.size != len(labels):
            raise ValueError("weight vector length does not match labels")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if not self.unconstrained:
            if np.any(w < 0.0):
                raise ValueError("simplex weights must be >= 0")
            if abs(w.sum() - 1.0) > 1e-9:
                raise ValueError(f"simplex weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "w", w)

    def as_dict(self):
        return dict(zip(self.labels, self.w.tolist()))


def check_same_grid(a, b):
    if a != b:
        raise GridMismatchError("wave grids differ")


# ---------------------------------------------------------------------------
# forward models


def _sphere_shape(x):
    """(sin x - x cos x)**2 / x**6, series-evaluated for small x."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    small = x < 0.1
    xs = x[small]
    x2 = xs * xs
    # sin x - x cos x = x^3 (1/3 - x^2/30 + x^4/840 - x^6/45360 + x^8/3991680)
    h = 1.0 / 3.0 + x2 * (-1.0 / 30.0 + x2 * (1.0 / 840.0 + x2 * (-1.0 / 45360.0 + x2 / 3991680.0)))
    out[small] = h * h
    xl = x[~small]
    out[~small] = (np.sin(xl) - xl * np.cos(xl)) ** 2 / xl**6
    return out


def sphere_intensity(q, r):
    """Scattered intensity of a sphere of radius ``r`` at wavenumber ``q``.

    ``(1/r^3) (sin(qr)/q^3 - r cos(qr)/q^2)^2``, evaluated in the
    cancellation-free form ``r^3 (sin x - x cos x)^2 / x^6`` with ``x = q r``.
    Broadcasts over array arguments.
    """
    qa = np.asarray(q, dtype=np.float64)
    ra = np.asarray(r, dtype=np.float64)
    if not (np.all(np.isfinite(qa)) and np.all(np.isfinite(ra))):
        raise DomainError("sphere_intensity requires finite q and r")
    if np.any(qa <= 0.0) or np.any(ra <= 0.0):
        raise DomainError("sphere_intensity requires q > 0 and r > 0")
    qa, ra = np.broadcast_arrays(qa, ra)
    out = ra**3 * _sphere_shape(qa * ra)
    if out.ndim == 0:
        return float(out)
    return out


def build_sas_basis(grid, radii):
    """Sphere form-factor basis: row ``i`` is ``sphere_intensity(q, r_i)``."""
    radii = np.asarray(radii, dtype=np.float64)
    labels = radius_labels(radii)
    intensity = sphere_intensity(grid.q[None, :], radii[:, None])
    return ComponentBasis(grid, labels, intensity)


def default_sas_basis():
    """300 radii (0.2 nm steps up to 60 nm) x 200 wavenumbers on [0.1, 5] 1/nm."""
    return build_sas_basis(WaveGrid.linear(0.1, 5.0, 200), radius_grid(0.2, 300))


def superpose(basis, weights):
    """Detection probability over bins for the given component weights.

    ``p_k`` is proportional to ``sum_i w_i * intensity[i, k]`` and normalized to
    sum to one.
    """
    if tuple(weights.labels) != basis.labels:
        raise GridMismatchError("weight labels do not match basis components")
    p = weights.w @ basis.intensity
    total = p.sum()
    if total <= 0.0:
        raise ValueError("superposition has zero total intensity")
    return p / total


def gamma_mixture_weights(radii, parts):
    """Simplex weights proportional to a mixture of gamma densities on ``radii``.

    ``parts`` is a sequence of ``(mix, shape, scale)`` triples.
    """
    radii = np.asarray(radii, dtype=np.float64)
    parts = list(parts)
    if not parts:
        raise ValueError("at least one gamma part is required")
    if any(m < 0 for m, _, _ in parts) or sum(m for m, _, _ in parts) <= 0:
        raise ValueError("mixing proportions must be >= 0 with a positive sum")
    dens = np.zeros_like(radii)
    for mix, shape, scale in parts:
        dens += mix * gamma_pdf(radii, shape, scale)
    total = dens.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ValueError("gamma mixture vanishes on the radius grid")
    return WeightDistribution(radius_labels(radii), dens / total)


# (mix, shape, scale) parts; every preset peaks at r = 20 nm on the 0.2 nm grid.
# These are harness presets, not recovered from any published ground truth.
SAS_PRESETS = {
    "plateau": [(0.6, 101.0, 0.2), (0.4, 2.5, 10.0)],
    "two-peak": [(0.6, 101.0, 0.2), (0.4, 61.0, 0.2)],
    "three-peak": [(0.3, 51.0, 0.2), (0.45, 101.0, 0.2), (0.25, 151.0, 0.2)],
}


def sample_events(p, events, seed):
    """Draw ``events`` categorical detections over bins with probability ``p``.

    Returns the histogram as a float vector. Identical arguments give
    identical output.
    """
    p = np.asarray(p, dtype=np.float64)
    events = int(events)
    if events <= 0:
        raise ValueError("events must be a positive integer")
    if p.ndim != 1 or np.any(p < 0.0) or not np.all(np.isfinite(p)):
        raise ValueError("p must be a non-negative finite vector")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"p sums to {p.sum()!r}, not 1")
    rng = np.random.default_rng(seed)
    return rng.multinomial(events, p / p.sum()).astype(np.float64)


def simulate_smi(grid, p, events, seed):
    return Smi(grid, sample_events(p, events, seed))


def synth_eds_basis(n_elements, grid, seed, *, overlap_pairs=None, background=0.1):
    """Synthetic EDS-like element spectra.

    Each element gets 1-4 Gaussian lines, crowded toward low channel numbers
    the way characteristic L/M lines are, with widths growing along the axis
    like detector resolution. The first ``overlap_pairs`` odd-indexed elements
    are single-line elements whose line sits within one channel of a line of
    the preceding element (the S-K / Pb-M situation). A shared smooth
    continuum carries ``background`` of each row's mass. Rows sum to one.

    Labels are ``E00``, ``E01``, ...; ``grid`` is treated as channel centers.
    """
    n_elements = int(n_elements)
    if n_elements < 2:
        raise ValueError("n_elements must be >= 2")
    if not 0.0 <= background < 1.0:
        raise ValueError("background fraction must lie in [0, 1)")
    if overlap_pairs is None:
        overlap_pairs = n_elements // 2
    n_ch = len(grid)
    ch = np.arange(n_ch, dtype=np.float64)
    rng = np.random.default_rng(seed)

    # Kramers-like falloff with low-energy absorption; strictly positive so no
    # bin is left unexplained when background noise lands there
    continuum = (n_ch - ch) / (ch + 1.0) * (1.0 - np.exp(-(ch + 1.0) / max(n_ch / 25.0, 1.0)))
    continuum /= continuum.sum()

    margin = min(20.0, n_ch / 10.0)
    rows = np.zeros((n_elements, n_ch))
    lines = []
    for i in range(n_elements):
        twin = i % 2 == 1 and i // 2 < overlap_pairs
        if twin:
            centers = [rng.choice(lines[i - 1]) + rng.uniform(-1.0, 1.0)]
        else:
            n_lines = rng.integers(2, 5) if i // 2 < overlap_pairs else rng.integers(1, 5)
            centers = list(margin + rng.exponential(n_ch / 16.0, size=n_lines))
        centers = [float(np.clip(c, margin, n_ch - 1 - margin)) for c in centers]
        lines.append(centers)
        for j, c in enumerate(centers):
            sigma = 2.5 + 4.5 * c / n_ch
            height = 1.0 if j == 0 else rng.uniform(0.2, 1.0)
            rows[i] += height * np.exp(-0.5 * ((ch - c) / sigma) ** 2)
        rows[i] /= rows[i].sum()
        rows[i] = (1.0 - background) * rows[i] + background * continuum
        rows[i] /= rows[i].sum()

    labels = tuple(f"E{i:02d}" for i in range(n_elements))
    return ComponentBasis(grid, labels, rows)
