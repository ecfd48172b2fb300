"""CSV / JSON file formats.

* basis:    header ``q,<label>,...``; one row per grid point
* spectrum: ``q,count``
* weights:  ``label,weight``
* manifest: ``compound,formula,k`` with formula ``label:ratio;label:ratio``

Floats are written in their shortest round-trip representation.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .eds import Compound
from .model import ComponentBasis, Smi, WaveGrid, WeightDistribution


class FormatError(ValueError):
    """A file does not follow the expected layout."""


def fmt(x):
    x = float(x)
    if x == 0.0:
        return "0"
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _writer(path):
    fh = open(path, "w", encoding="utf-8", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def _read_rows(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise FormatError(f"{path}: empty file")
    return rows[0], rows[1:]


def _float(cell, path):
    try:
        v = float(cell)
    except ValueError:
        raise FormatError(f"{path}: not a number: {cell!r}") from None
    if not math.isfinite(v):
        raise FormatError(f"{path}: non-finite value {cell!r}")
    return v


def write_basis(path, basis):
    fh, w = _writer(path)
    with fh:
        w.writerow(["q", *basis.labels])
        for k, q in enumerate(basis.grid.q):
            w.writerow([fmt(q), *(fmt(v) for v in basis.intensity[:, k])])


def read_basis(path):
    header, rows = _read_rows(path)
    if header[0] != "q" or len(header) < 2:
        raise FormatError(f"{path}: basis header must start with 'q' and name components")
    data = np.array([[_float(c, path) for c in row] for row in rows])
    if data.ndim != 2 or data.shape[1] != len(header):
        raise FormatError(f"{path}: ragged basis rows")
    return ComponentBasis(WaveGrid(data[:, 0]), tuple(header[1:]), data[:, 1:].T)


def write_spectrum(path, grid, values, column="count"):
    fh, w = _writer(path)
    with fh:
        w.writerow(["q", column])
        for q, v in zip(grid.q, values):
            w.writerow([fmt(q), fmt(v)])


def read_spectrum(path):
    header, rows = _read_rows(path)
    if header != ["q", "count"]:
        raise FormatError(f"{path}: spectrum header must be 'q,count'")
    data = np.array([[_float(c, path) for c in row] for row in rows])
    if data.ndim != 2 or data.shape[1] != 2:
        raise FormatError(f"{path}: spectrum rows must have two columns")
    return Smi(WaveGrid(data[:, 0]), data[:, 1])


def write_weights(path, weights):
    fh, w = _writer(path)
    with fh:
        w.writerow(["label", "weight"])
        for label, v in zip(weights.labels, weights.w):
            w.writerow([label, fmt(v)])


def read_weights(path, unconstrained=True):
    header, rows = _read_rows(path)
    if header != ["label", "weight"]:
        raise FormatError(f"{path}: weights header must be 'label,weight'")
    labels = [r[0] for r in rows]
    values = [_float(r[1], path) for r in rows]
    return WeightDistribution(tuple(labels), values, unconstrained=unconstrained)


def write_manifest(path, compounds):
    fh, w = _writer(path)
    with fh:
        w.writerow(["compound", "formula", "k"])
        for c in compounds:
            formula = ";".join(f"{label}:{fmt(r)}" for label, r in c.formula)
            w.writerow([c.name, formula, c.k])


def read_manifest(path):
    header, rows = _read_rows(path)
    if header != ["compound", "formula", "k"]:
        raise FormatError(f"{path}: manifest header must be 'compound,formula,k'")
    out = []
    for row in rows:
        if len(row) != 3:
            raise FormatError(f"{path}: manifest rows need three columns")
        name, formula, k = row
        parts = []
        for item in formula.split(";"):
            label, sep, ratio = item.partition(":")
            if not sep:
                raise FormatError(f"{path}: bad formula entry {item!r}")
            parts.append((label.strip(), _float(ratio, path)))
        try:
            k = int(k)
        except ValueError:
            raise FormatError(f"{path}: k must be an integer, got {k!r}") from None
        out.append(Compound(name, tuple(parts), k))
    return out


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def dumps(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
