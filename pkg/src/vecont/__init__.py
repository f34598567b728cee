"""vecont: discretized vector ontologies over feature-labeled corpora.

Fit an equal-frequency grid over a corpus, ask a chat model where domain
entities live in that grid, and measure how consistent and how accurate the
answers are against the corpus ground truth.
"""

from .ontology import (
    MUSIC_DIMENSIONS,
    DimensionSpec,
    Ontology,
    assign_bin,
    bin_center,
    fit_edges,
    search_resolution,
)

__version__ = "0.1.0"

__all__ = [
    "MUSIC_DIMENSIONS",
    "DimensionSpec",
    "Ontology",
    "assign_bin",
    "bin_center",
    "fit_edges",
    "search_resolution",
    "__version__",
]
