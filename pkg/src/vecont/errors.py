"""Exception hierarchy shared across the toolkit.

Every error raised by the library derives from :class:`VecontError` so
callers can catch toolkit failures without swallowing programming errors.
"""

from __future__ import annotations


class VecontError(Exception):
    """Base class for all toolkit errors."""


# --- ontology ---------------------------------------------------------------

class EmptyCorpus(VecontError):
    """An operation that needs at least one record received none."""


class DegenerateDimension(VecontError):
    """A dimension has too few distinct values to support the requested bins."""

    def __init__(self, dimension: str, message: str = ""):
        self.dimension = dimension
        super().__init__(message or f"dimension {dimension!r} is degenerate")


class OutOfDomain(VecontError):
    """A feature value lies outside its dimension's declared bounds."""

    def __init__(self, dimension: str, value: float, record_id: str | None = None):
        self.dimension = dimension
        self.value = value
        self.record_id = record_id
        where = f" (record {record_id!r})" if record_id else ""
        super().__init__(f"value {value!r} outside domain of {dimension!r}{where}")


class IndexOutOfRange(VecontError):
    """A bin index falls outside [0, bins_per_dim - 1]."""

    def __init__(self, dimension: str, value: object):
        self.dimension = dimension
        self.value = value
        super().__init__(f"index {value!r} out of range for dimension {dimension!r}")


class NoFeasibleResolution(VecontError):
    """No bin count satisfied the density threshold."""


# --- dataset ----------------------------------------------------------------

class ParseError(VecontError):
    """A corpus file line could not be parsed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class SchemaError(VecontError):
    """A corpus file is missing required fields."""

    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        super().__init__(f"missing required fields: {', '.join(self.missing)}")


class InvalidSpec(VecontError):
    """A synthetic-corpus specification is inconsistent."""


class GenreAbsent(VecontError):
    """The requested genre does not occur anywhere in the index."""

    def __init__(self, genre: str):
        self.genre = genre
        super().__init__(f"genre {genre!r} absent from index")


class UnfittedProjector(VecontError):
    """A 2-D projection was requested from an unusable projector."""


# --- extraction -------------------------------------------------------------

class PositionParseError(VecontError):
    """Base for recoverable response-parsing failures (retryable)."""

    reason = "ParseError"


class MalformedJson(PositionParseError):
    """No parseable position payload found in the response."""

    reason = "MalformedJson"


class MissingDimension(PositionParseError):
    """The response named a position but left out a dimension."""

    reason = "MissingDimension"

    def __init__(self, dimension: str):
        self.dimension = dimension
        super().__init__(f"missing dimension {dimension!r}")


class PositionIndexOutOfRange(PositionParseError):
    """The response contained an index outside the bin range."""

    reason = "IndexOutOfRange"

    def __init__(self, dimension: str, value: object):
        self.dimension = dimension
        self.value = value
        super().__init__(f"index {value!r} out of range for dimension {dimension!r}")


class NetworkError(VecontError):
    """The chat endpoint could not be reached or answered abnormally."""

    reason = "NetworkError"


class CacheMiss(VecontError):
    """Replay mode found no recorded response for a request key."""

    reason = "CacheMiss"


# --- geometry ---------------------------------------------------------------

class EmptyCloud(VecontError):
    """A point-cloud operation received no points."""


class InsufficientPoints(VecontError):
    """A point-cloud operation needs more points than it received."""


class NegativeRadius(VecontError):
    """Ball volume requested with a negative radius."""


class ZeroVector(VecontError):
    """Cosine similarity is undefined for a zero-length vector."""


class DegenerateCovariance(VecontError):
    """PCA requested on a cloud with no variance."""


# --- stats ------------------------------------------------------------------

class DegenerateSample(VecontError):
    """A statistical test received samples it cannot handle."""


class ZeroVariance(VecontError):
    """Effect size is undefined when the pooled standard deviation is zero."""


# --- analysis ---------------------------------------------------------------

class TooFewPoints(VecontError):
    """A genre has too few successful positions for the requested analysis."""

    def __init__(self, genre: str, count: int):
        self.genre = genre
        self.count = count
        super().__init__(f"genre {genre!r} has only {count} successful positions")


class InsufficientGenres(VecontError):
    """Not enough genres share a formulation for neighborhood analysis."""

    def __init__(self, formulation: str, message: str = ""):
        self.formulation = formulation
        super().__init__(message or f"too few genres for formulation {formulation!r}")


# --- pipeline ---------------------------------------------------------------

class ConfigError(VecontError):
    """Run configuration failed validation; lists every violation at once."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))


class MissingArtifact(VecontError):
    """A pipeline stage needs an artifact a prior stage has not produced."""

    def __init__(self, path: str, stage: str):
        self.path = path
        self.stage = stage
        super().__init__(f"missing artifact {path}; run the '{stage}' stage first")
