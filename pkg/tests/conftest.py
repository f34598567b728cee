"""Shared fixtures: the published discretization table and small helpers."""

from __future__ import annotations

import warnings

import numpy as np
import pytest

from vecont.ontology import (
    MUSIC_DIMENSIONS,
    Ontology,
    dimension_with_edges,
    regular_ontology,
)

# Published 6-bin discretization of the 8 music features (the degenerate
# instrumentalness rows collapse and get widened on construction).
TABLE1_EDGES = {
    "danceability": [0.00, 0.35, 0.48, 0.58, 0.67, 0.76, 1.00],
    "energy": [0.00, 0.20, 0.42, 0.59, 0.73, 0.86, 1.00],
    "speechiness": [0.00, 0.03, 0.04, 0.05, 0.07, 0.13, 0.97],
    "acousticness": [0.00, 0.01, 0.06, 0.27, 0.66, 0.92, 1.00],
    "instrumentalness": [0.00, 0.00, 0.00, 0.03, 0.61, 0.87, 1.00],
    "liveness": [0.00, 0.08, 0.10, 0.12, 0.18, 0.33, 1.00],
    "valence": [0.00, 0.14, 0.29, 0.43, 0.59, 0.77, 1.00],
    "tempo": [0.0, 88.0, 105.0, 120.0, 129.0, 145.0, 250.0],
}

BEETHOVEN_FEATURES = [0.3, 0.2, 0.0, 0.9, 0.9, 0.1, 0.2, 95.0]
BEETHOVEN_POSITION = (0, 0, 0, 4, 5, 1, 1, 1)


def make_table1_ontology() -> Ontology:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        dims = tuple(
            dimension_with_edges(name, edges[0], edges[-1], edges)
            for name, edges in TABLE1_EDGES.items()
        )
    return Ontology(dims, 6)


@pytest.fixture(scope="session")
def table1_ontology() -> Ontology:
    return make_table1_ontology()


@pytest.fixture(scope="session")
def grid_ontology_6_8() -> Ontology:
    """Equal-width 6-bin grid over the 8 music dimensions."""
    return regular_ontology(MUSIC_DIMENSIONS, 6)


def distinct_uniform_corpus(n_records: int, seed: int = 0) -> np.ndarray:
    """A corpus with distinct values in every music dimension."""
    rng = np.random.default_rng(seed)
    cols = []
    for name, lo, hi in MUSIC_DIMENSIONS:
        width = hi - lo
        col = np.linspace(lo + 0.001 * width, hi - 0.001 * width, n_records)
        cols.append(rng.permutation(col))
    return np.column_stack(cols)
