"""Discretized vector-ontology core.

An ontology names a set of interpretable feature dimensions and slices each
one into ``n`` equal-frequency ranges fitted from a corpus. A feature vector
is then addressed by a tuple of bin indices, and every bin maps to the center
of its hypercube in the unit cube, which is the coordinate system used by all
downstream geometry.

Interval convention: the first bin is closed on both sides,
``[edges[0], edges[1]]``; every other bin is half-open on the left,
``(edges[i], edges[i+1]]``. A value sitting exactly on an interior edge
therefore belongs to the lower bin.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateDimension,
    EmptyCorpus,
    IndexOutOfRange,
    NoFeasibleResolution,
    OutOfDomain,
)

ONTOLOGY_SCHEMA_VERSION = 1

#: The default music feature schema: name, domain minimum, domain maximum.
#: Tempo is measured in BPM; every other feature lives in [0, 1].
MUSIC_DIMENSIONS: tuple[tuple[str, float, float], ...] = (
    ("danceability", 0.0, 1.0),
    ("energy", 0.0, 1.0),
    ("speechiness", 0.0, 1.0),
    ("acousticness", 0.0, 1.0),
    ("instrumentalness", 0.0, 1.0),
    ("liveness", 0.0, 1.0),
    ("valence", 0.0, 1.0),
    ("tempo", 0.0, 250.0),
)


@dataclass(frozen=True)
class DimensionSpec:
    """One named axis: domain bounds plus n+1 strictly increasing bin edges."""

    name: str
    domain_min: float
    domain_max: float
    edges: tuple[float, ...]

    def __post_init__(self):
        if not self.name:
            raise ValueError("dimension name must be non-empty")
        if not self.domain_min < self.domain_max:
            raise ValueError(f"{self.name}: domain_min must be < domain_max")
        if len(self.edges) < 2:
            raise ValueError(f"{self.name}: need at least 2 edges")
        e = np.asarray(self.edges, dtype=float)
        if not np.all(np.diff(e) > 0):
            raise ValueError(f"{self.name}: edges must be strictly increasing")
        if e[0] != self.domain_min or e[-1] != self.domain_max:
            raise ValueError(f"{self.name}: edges must start/end at the domain bounds")

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1


@dataclass(frozen=True)
class Ontology:
    """A finite set of named dimensions sharing one bin count."""

    dimensions: tuple[DimensionSpec, ...]
    bins_per_dim: int

    def __post_init__(self):
        if not self.dimensions:
            raise ValueError("ontology needs at least one dimension")
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")
        if self.bins_per_dim < 1:
            raise ValueError("bins_per_dim must be positive")
        for d in self.dimensions:
            if d.n_bins != self.bins_per_dim:
                raise ValueError(f"{d.name}: expected {self.bins_per_dim} bins, got {d.n_bins}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    @property
    def dim(self) -> int:
        return len(self.dimensions)

    def total_bins(self) -> int:
        """Exact number of addressable positions, ``n ** d`` as a Python int."""
        return self.bins_per_dim ** self.dim


def _widen_duplicate_edges(edges: np.ndarray, name: str) -> np.ndarray:
    """Make quantile edges strictly increasing without moving the bounds.

    Collapsed interior edges (heavy duplicate values in the data) are nudged
    up by the smallest representable step; if that crowds the upper bound the
    offending run is nudged down instead. Emits a RuntimeWarning when any
    edge moves.
    """
    e = edges.astype(float).copy()
    moved = False
    for i in range(1, len(e) - 1):
        if e[i] <= e[i - 1]:
            e[i] = np.nextafter(e[i - 1], np.inf)
            moved = True
    for i in range(len(e) - 2, 0, -1):
        if e[i] >= e[i + 1]:
            e[i] = np.nextafter(e[i + 1], -np.inf)
            moved = True
    if not np.all(np.diff(e) > 0):
        raise DegenerateDimension(name, f"dimension {name!r}: cannot widen collapsed edges")
    if moved:
        warnings.warn(
            f"dimension {name!r}: collapsed bin edges widened by minimal steps",
            RuntimeWarning,
            stacklevel=3,
        )
    return e


def dimension_with_edges(
    name: str, domain_min: float, domain_max: float, edges: list[float] | tuple[float, ...]
) -> DimensionSpec:
    """Build a DimensionSpec from possibly collapsed edges, widening duplicates."""
    e = np.asarray(edges, dtype=float)
    e = _widen_duplicate_edges(e, name)
    return DimensionSpec(name, float(domain_min), float(domain_max), tuple(float(x) for x in e))


def _as_matrix(corpus_features, d: int | None = None) -> np.ndarray:
    x = np.asarray(corpus_features, dtype=float)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2:
        raise ValueError("corpus features must be a 2-D array of shape (records, dims)")
    if d is not None and x.shape[1] != d:
        raise ValueError(f"expected {d} feature columns, got {x.shape[1]}")
    return x


def fit_edges(
    corpus_features,
    n: int,
    dimensions: tuple[tuple[str, float, float], ...] = MUSIC_DIMENSIONS,
) -> Ontology:
    """Fit an equal-frequency ontology over a corpus.

    Per dimension the edges are the 0, 1/n, ..., n/n empirical quantiles of
    the corpus values, with the outermost edges forced to the declared domain
    bounds, so each bin holds an equal share of the corpus up to integer
    remainder and duplicate-value collapse.

    Args:
        corpus_features: array-like of shape (records, dims), native units.
        n: number of bins per dimension.
        dimensions: (name, domain_min, domain_max) triples, one per column.

    Raises:
        EmptyCorpus: no records given.
        DegenerateDimension: a dimension has fewer than n distinct values.
        OutOfDomain: a value lies outside its dimension's bounds.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x = np.asarray(corpus_features, dtype=float)
    if x.size == 0:
        raise EmptyCorpus("cannot fit edges on an empty corpus")
    x = _as_matrix(x, len(dimensions))
    qs = np.linspace(0.0, 1.0, n + 1)
    specs = []
    for j, (name, lo, hi) in enumerate(dimensions):
        col = x[:, j]
        if col.min() < lo or col.max() > hi:
            bad = col[(col < lo) | (col > hi)][0]
            raise OutOfDomain(name, float(bad))
        if np.unique(col).size < n:
            raise DegenerateDimension(
                name, f"dimension {name!r} has fewer than {n} distinct values"
            )
        edges = np.quantile(col, qs)
        edges[0], edges[-1] = lo, hi
        edges = _widen_duplicate_edges(edges, name)
        specs.append(DimensionSpec(name, float(lo), float(hi), tuple(float(e) for e in edges)))
    return Ontology(tuple(specs), n)


def regular_ontology(
    dimensions: tuple[tuple[str, float, float], ...], n: int
) -> Ontology:
    """Build an ontology with equal-width bins (no corpus needed)."""
    specs = []
    for name, lo, hi in dimensions:
        edges = np.linspace(lo, hi, n + 1)
        edges[0], edges[-1] = lo, hi
        specs.append(DimensionSpec(name, float(lo), float(hi), tuple(float(e) for e in edges)))
    return Ontology(tuple(specs), n)


def assign_bin(ontology: Ontology, v) -> tuple[int, ...]:
    """Map one feature vector to its bin-index tuple.

    A value equal to an interior edge lands in the lower bin; the domain
    minimum lands in bin 0.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (ontology.dim,):
        raise ValueError(f"expected {ontology.dim} values, got shape {v.shape}")
    out = []
    for spec, val in zip(ontology.dimensions, v):
        if val < spec.domain_min or val > spec.domain_max:
            raise OutOfDomain(spec.name, float(val))
        idx = int(np.searchsorted(spec.edges, val, side="left")) - 1
        out.append(max(idx, 0))
    return tuple(out)


def assign_bins(ontology: Ontology, corpus_features) -> np.ndarray:
    """Vectorized :func:`assign_bin` over a (records, dims) matrix."""
    x = _as_matrix(corpus_features, ontology.dim)
    out = np.empty(x.shape, dtype=np.int64)
    for j, spec in enumerate(ontology.dimensions):
        col = x[:, j]
        bad = (col < spec.domain_min) | (col > spec.domain_max)
        if bad.any():
            i = int(np.argmax(bad))
            raise OutOfDomain(spec.name, float(col[i]))
        out[:, j] = np.searchsorted(np.asarray(spec.edges), col, side="left") - 1
    np.maximum(out, 0, out=out)
    return out


def bin_center(ontology: Ontology, position) -> np.ndarray:
    """Center of a bin's hypercube in the unit cube: ``(index + 0.5) / n``."""
    p = np.asarray(position)
    if p.shape != (ontology.dim,):
        raise ValueError(f"expected {ontology.dim} indices, got shape {p.shape}")
    n = ontology.bins_per_dim
    for spec, idx in zip(ontology.dimensions, p):
        if not (0 <= idx <= n - 1):
            raise IndexOutOfRange(spec.name, int(idx))
    return (p.astype(float) + 0.5) / n


def bin_centers(ontology: Ontology, positions) -> np.ndarray:
    """Vectorized :func:`bin_center` over a (records, dims) index matrix."""
    p = np.asarray(positions)
    if p.ndim == 1:
        p = p.reshape(1, -1)
    if p.shape[1] != ontology.dim:
        raise ValueError(f"expected {ontology.dim} index columns, got {p.shape[1]}")
    n = ontology.bins_per_dim
    if p.size and (p.min() < 0 or p.max() > n - 1):
        j = int(np.argmax((p < 0) | (p > n - 1)) % p.shape[1])
        raise IndexOutOfRange(ontology.dimensions[j].name, int(p.flat[np.argmax((p < 0) | (p > n - 1))]))
    return (p.astype(float) + 0.5) / n


def to_native_units(ontology: Ontology, point) -> np.ndarray:
    """Lift a unit-cube coordinate back into native units via the edges.

    A coordinate strictly inside the span of bin i maps to a value strictly
    inside that bin's native range, so ``assign_bin`` round-trips bin centers.
    """
    c = np.asarray(point, dtype=float)
    if c.shape != (ontology.dim,):
        raise ValueError(f"expected {ontology.dim} coordinates, got shape {c.shape}")
    if c.min() < 0.0 or c.max() > 1.0:
        raise ValueError("normalized coordinates must lie in [0, 1]")
    n = ontology.bins_per_dim
    out = np.empty(ontology.dim)
    for j, spec in enumerate(ontology.dimensions):
        i = min(int(c[j] * n), n - 1)
        frac = c[j] * n - i
        lo, hi = spec.edges[i], spec.edges[i + 1]
        out[j] = lo + frac * (hi - lo)
    return out


def occupancy(ontology: Ontology, corpus_features) -> float:
    """Fraction of the ``n ** d`` bins holding at least one corpus point.

    Counts distinct positions only; the full grid is never materialized.
    """
    idx = assign_bins(ontology, corpus_features)
    occupied = np.unique(idx, axis=0).shape[0]
    return occupied / ontology.total_bins()


def search_resolution(
    corpus_features,
    density_threshold: float,
    n_max: int = 64,
    dimensions: tuple[tuple[str, float, float], ...] = MUSIC_DIMENSIONS,
) -> tuple[int, float]:
    """Find the largest bin count whose occupancy meets a density threshold.

    Scans n upward from 1; occupancy is non-increasing in n, so the scan
    stops at the first n that falls below the threshold (or cannot be
    fitted) and returns the previous one together with its occupancy.
    """
    if not (0.0 < density_threshold <= 1.0):
        raise ValueError("density_threshold must be in (0, 1]")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    x = np.asarray(corpus_features, dtype=float)
    if x.size == 0:
        raise EmptyCorpus("cannot search resolution on an empty corpus")
    best: tuple[int, float] | None = None
    for n in range(1, n_max + 1):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                ont = fit_edges(x, n, dimensions)
        except DegenerateDimension:
            break
        occ = occupancy(ont, x)
        if occ >= density_threshold:
            best = (n, occ)
        else:
            break
    if best is None:
        raise NoFeasibleResolution(f"no n in [1, {n_max}] reaches density {density_threshold}")
    return best


# --- serialization ----------------------------------------------------------

def ontology_to_dict(ontology: Ontology) -> dict:
    return {
        "schema_version": ONTOLOGY_SCHEMA_VERSION,
        "bins_per_dim": ontology.bins_per_dim,
        "dimensions": [
            {
                "name": d.name,
                "domain_min": d.domain_min,
                "domain_max": d.domain_max,
                "edges": list(d.edges),
            }
            for d in ontology.dimensions
        ],
    }


def ontology_from_dict(data: dict) -> Ontology:
    specs = tuple(
        DimensionSpec(d["name"], d["domain_min"], d["domain_max"], tuple(d["edges"]))
        for d in data["dimensions"]
    )
    return Ontology(specs, data["bins_per_dim"])


def save_ontology(ontology: Ontology, path) -> None:
    Path(path).write_text(json.dumps(ontology_to_dict(ontology), indent=2, sort_keys=True) + "\n")


def load_ontology(path) -> Ontology:
    return ontology_from_dict(json.loads(Path(path).read_text()))
