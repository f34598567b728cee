"""Corpus ingestion, synthetic corpus generation, and the ground-truth genre
index (per-bin genre counters, weighted centroids, heatmap grids).

A song's genre labels are the union of its artists' genre lists. Each song
lands in exactly one bin; each of its genres increments that bin's counter
by one.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    GenreAbsent,
    InvalidSpec,
    OutOfDomain,
    ParseError,
    SchemaError,
    UnfittedProjector,
)
from .geometry import PcaModel, project
from .ontology import MUSIC_DIMENSIONS, Ontology, assign_bins, bin_center
from .stats import derive_rng

INDEX_SCHEMA_VERSION = 1
CSV_GENRE_DELIMITER = ";"


@dataclass(frozen=True)
class SongRecord:
    """One corpus item: identity, artists with their genre lists, features."""

    id: str
    title: str
    artists: tuple[tuple[str, tuple[str, ...]], ...]
    features: tuple[float, ...]

    @property
    def artist_genres(self) -> frozenset[str]:
        """Union of genre labels over all of the song's artists."""
        return frozenset(g for _, genres in self.artists for g in genres)


@dataclass(frozen=True)
class GenreCentroid:
    genre: str
    point: np.ndarray
    weight_total: int


@dataclass(frozen=True)
class IngestResult:
    records: list[SongRecord]
    skipped: int
    skip_reasons: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class GenreCluster:
    """One synthetic genre hotspot: mean features, per-dimension spreads, weight."""

    genre: str
    mean: tuple[float, ...]
    spread: tuple[float, ...]
    weight: float = 1.0


@dataclass(frozen=True)
class SynthSpec:
    """Mixture-of-clusters description of a synthetic corpus."""

    clusters: tuple[GenreCluster, ...]
    total_count: int
    seed: int
    dimensions: tuple[tuple[str, float, float], ...] = MUSIC_DIMENSIONS

    def validate(self) -> None:
        problems = []
        if not self.clusters:
            problems.append("at least one cluster is required")
        if self.total_count < 1:
            problems.append("total_count must be >= 1")
        d = len(self.dimensions)
        for c in self.clusters:
            if c.weight <= 0:
                problems.append(f"{c.genre}: weight must be positive")
            if len(c.mean) != d or len(c.spread) != d:
                problems.append(f"{c.genre}: mean/spread must have {d} entries")
                continue
            for (name, lo, hi), m in zip(self.dimensions, c.mean):
                if not (lo <= m <= hi):
                    problems.append(f"{c.genre}: mean for {name} outside [{lo}, {hi}]")
            if any(s < 0 for s in c.spread):
                problems.append(f"{c.genre}: spreads must be >= 0")
        if problems:
            raise InvalidSpec("; ".join(problems))


def _apportion(weights: list[float], total: int) -> list[int]:
    """Largest-remainder split of `total` proportional to `weights`."""
    w = np.asarray(weights, dtype=float)
    exact = total * w / w.sum()
    counts = np.floor(exact).astype(int)
    remainder = total - int(counts.sum())
    order = np.argsort(-(exact - counts), kind="stable")
    for i in order[:remainder]:
        counts[i] += 1
    return counts.tolist()


def synthesize(spec: SynthSpec) -> list[SongRecord]:
    """Draw a deterministic corpus from the mixture spec.

    Per-genre counts follow the mixture weights exactly up to rounding;
    features are Gaussian around each cluster mean and clipped into the
    domain bounds. Identical spec and seed give byte-identical records.
    """
    spec.validate()
    rng = derive_rng(spec.seed, "synthesis")
    counts = _apportion([c.weight for c in spec.clusters], spec.total_count)
    lo = np.array([d[1] for d in spec.dimensions])
    hi = np.array([d[2] for d in spec.dimensions])
    records: list[SongRecord] = []
    for cluster, count in zip(spec.clusters, counts):
        mean = np.asarray(cluster.mean, dtype=float)
        spread = np.asarray(cluster.spread, dtype=float)
        feats = mean + spread * rng.standard_normal((count, len(spec.dimensions)))
        np.clip(feats, lo, hi, out=feats)
        slug = cluster.genre.replace(" ", "-")
        for i in range(count):
            records.append(
                SongRecord(
                    id=f"synth-{slug}-{i:05d}",
                    title=f"{cluster.genre} piece {i}",
                    artists=((f"{cluster.genre} ensemble", (cluster.genre,)),),
                    features=tuple(float(x) for x in feats[i]),
                )
            )
    return records


# --- file formats -----------------------------------------------------------

def record_to_json_dict(record: SongRecord, dimensions=MUSIC_DIMENSIONS) -> dict:
    return {
        "id": record.id,
        "title": record.title,
        "artists": [{"name": name, "genres": list(genres)} for name, genres in record.artists],
        "features": {dim[0]: val for dim, val in zip(dimensions, record.features)},
    }


def write_jsonl(path, records: list[SongRecord], dimensions=MUSIC_DIMENSIONS) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(record_to_json_dict(r, dimensions), sort_keys=True) + "\n")


def _validate_features(features: dict, dimensions) -> tuple[float, ...] | str:
    vals = []
    for name, lo, hi in dimensions:
        if name not in features or features[name] is None:
            return f"missing feature {name!r}"
        try:
            v = float(features[name])
        except (TypeError, ValueError):
            return f"non-numeric feature {name!r}"
        if not (lo <= v <= hi):
            return f"feature {name!r}={v} outside [{lo}, {hi}]"
        vals.append(v)
    return tuple(vals)


def ingest(path, format: str | None = None, dimensions=MUSIC_DIMENSIONS) -> IngestResult:
    """Load and validate a corpus file.

    Rows whose features are missing, non-numeric, or outside their domain
    bounds are rejected and counted rather than aborting the load. A file
    whose very shape is wrong (unparseable line, missing schema fields)
    raises instead.

    Args:
        path: corpus file.
        format: "jsonl" or "csv"; inferred from the suffix when omitted.
    """
    path = Path(path)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    if fmt == "jsonl":
        return _ingest_jsonl(path, dimensions)
    if fmt == "csv":
        return _ingest_csv(path, dimensions)
    raise ValueError(f"unknown corpus format {fmt!r}")


def _ingest_jsonl(path: Path, dimensions) -> IngestResult:
    records: list[SongRecord] = []
    skipped = 0
    reasons: list[str] = []
    seen_ids: set[str] = set()
    required = ("id", "title", "artists", "features")
    first_row = True
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(lineno, str(exc)) from exc
            missing = [k for k in required if k not in row]
            if first_row and missing:
                raise SchemaError(missing)
            first_row = False
            if missing:
                skipped += 1
                reasons.append(f"line {lineno}: missing fields {missing}")
                continue
            feats = _validate_features(row["features"], dimensions)
            if isinstance(feats, str):
                skipped += 1
                reasons.append(f"line {lineno}: {feats}")
                continue
            rid = str(row["id"])
            if not rid or rid in seen_ids:
                skipped += 1
                reasons.append(f"line {lineno}: empty or duplicate id {rid!r}")
                continue
            seen_ids.add(rid)
            artists = tuple(
                (str(a.get("name", "")), tuple(str(g) for g in a.get("genres", [])))
                for a in row["artists"]
            )
            records.append(SongRecord(rid, str(row["title"]), artists, feats))
    return IngestResult(records, skipped, reasons)


def _ingest_csv(path: Path, dimensions) -> IngestResult:
    records: list[SongRecord] = []
    skipped = 0
    reasons: list[str] = []
    seen_ids: set[str] = set()
    feature_names = [d[0] for d in dimensions]
    required = ["id", "title", "genres", *feature_names]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(missing)
        for row in reader:
            lineno = reader.line_num
            feats = _validate_features({n: row.get(n) for n in feature_names}, dimensions)
            if isinstance(feats, str):
                skipped += 1
                reasons.append(f"line {lineno}: {feats}")
                continue
            rid = row["id"]
            if not rid or rid in seen_ids:
                skipped += 1
                reasons.append(f"line {lineno}: empty or duplicate id {rid!r}")
                continue
            seen_ids.add(rid)
            genres = tuple(g.strip() for g in row["genres"].split(CSV_GENRE_DELIMITER) if g.strip())
            records.append(SongRecord(rid, row["title"], ((row.get("artist", ""), genres),), feats))
    return IngestResult(records, skipped, reasons)


# --- ground-truth index -----------------------------------------------------

@dataclass
class GroundTruthIndex:
    """Per-bin genre counters over a corpus, keyed by bin-index tuples."""

    bins_per_dim: int
    dim_names: tuple[str, ...]
    bin_genre_counts: dict[tuple[int, ...], dict[str, int]]
    bin_song_ids: dict[tuple[int, ...], tuple[str, ...]]
    total_songs: int

    @property
    def dim(self) -> int:
        return len(self.dim_names)

    def genres(self) -> set[str]:
        out: set[str] = set()
        for counts in self.bin_genre_counts.values():
            out.update(counts)
        return out

    def bins_for_genre(self, genre: str) -> dict[tuple[int, ...], int]:
        return {
            pos: counts[genre]
            for pos, counts in self.bin_genre_counts.items()
            if genre in counts
        }


def build_index(ontology: Ontology, corpus: list[SongRecord]) -> GroundTruthIndex:
    """Assign every song to its bin and count its genres there.

    The result is independent of corpus order: song id lists are sorted and
    counters are plain additive dicts.
    """
    if corpus:
        feats = np.asarray([r.features for r in corpus], dtype=float)
        try:
            positions = assign_bins(ontology, feats)
        except OutOfDomain as exc:
            for r in corpus:
                j = ontology.names.index(exc.dimension)
                lo, hi = ontology.dimensions[j].domain_min, ontology.dimensions[j].domain_max
                if not (lo <= r.features[j] <= hi):
                    raise OutOfDomain(exc.dimension, r.features[j], record_id=r.id) from exc
            raise
    else:
        positions = np.empty((0, ontology.dim), dtype=int)
    genre_counts: dict[tuple[int, ...], dict[str, int]] = {}
    song_ids: dict[tuple[int, ...], list[str]] = {}
    for record, row in zip(corpus, positions):
        pos = tuple(int(i) for i in row)
        counts = genre_counts.setdefault(pos, {})
        for g in record.artist_genres:
            counts[g] = counts.get(g, 0) + 1
        song_ids.setdefault(pos, []).append(record.id)
    return GroundTruthIndex(
        bins_per_dim=ontology.bins_per_dim,
        dim_names=ontology.names,
        bin_genre_counts=genre_counts,
        bin_song_ids={pos: tuple(sorted(ids)) for pos, ids in song_ids.items()},
        total_songs=len(corpus),
    )


def genre_centroid(index: GroundTruthIndex, genre: str, min_count: int = 0) -> GenreCentroid:
    """Count-weighted mean of the bin centers where the genre occurs.

    Bins with fewer than ``min_count`` occurrences are ignored (default 0,
    meaning every occurrence contributes).
    """
    bins = {p: c for p, c in index.bins_for_genre(genre).items() if c >= min_count and c > 0}
    if not bins:
        raise GenreAbsent(genre)
    n = index.bins_per_dim
    total = 0
    acc = np.zeros(index.dim)
    for pos, count in bins.items():
        acc += count * (np.asarray(pos, dtype=float) + 0.5) / n
        total += count
    return GenreCentroid(genre=genre, point=acc / total, weight_total=total)


@dataclass(frozen=True)
class HeatmapGrid:
    """2-D projection of per-bin genre counts.

    ``values[i, j]`` is the mean genre count over occupied bins whose
    projected centers land in cell (i, j); cells where no bin landed have
    ``bin_counts == 0`` and a NaN value, which is distinct from a populated
    cell whose mean count is 0.0.
    """

    values: np.ndarray
    bin_counts: np.ndarray
    x_edges: np.ndarray
    y_edges: np.ndarray


def heatmap_grid(
    index: GroundTruthIndex, genre: str, projector: PcaModel, grid: int
) -> HeatmapGrid:
    """Project occupied bin centers to 2-D and average the genre's counts per cell."""
    if projector is None or projector.n_components < 2:
        raise UnfittedProjector("heatmap needs a fitted projector with >= 2 components")
    if grid < 1:
        raise ValueError("grid must be >= 1")
    occupied = sorted(index.bin_genre_counts)
    if not occupied:
        raise GenreAbsent(genre)
    n = index.bins_per_dim
    centers = (np.asarray(occupied, dtype=float) + 0.5) / n
    pts = project(projector, centers)[:, :2]
    counts = np.array(
        [index.bin_genre_counts[pos].get(genre, 0) for pos in occupied], dtype=float
    )
    mins = pts.min(axis=0)
    maxs = pts.max(axis=0)
    span = np.where(maxs > mins, maxs - mins, 1.0)
    lo = np.where(maxs > mins, mins, mins - 0.5)
    cell = np.floor((pts - lo) / span * grid).astype(int)
    np.clip(cell, 0, grid - 1, out=cell)
    sums = np.zeros((grid, grid))
    hits = np.zeros((grid, grid), dtype=int)
    for (cx, cy), c in zip(cell, counts):
        sums[cx, cy] += c
        hits[cx, cy] += 1
    with np.errstate(invalid="ignore"):
        values = np.where(hits > 0, sums / np.maximum(hits, 1), np.nan)
    x_edges = lo[0] + span[0] * np.arange(grid + 1) / grid
    y_edges = lo[1] + span[1] * np.arange(grid + 1) / grid
    return HeatmapGrid(values=values, bin_counts=hits, x_edges=x_edges, y_edges=y_edges)


def sample_songs(
    index: GroundTruthIndex,
    songs_by_id: dict[str, SongRecord],
    position: tuple[int, ...],
    cap: int,
    seed: int,
) -> tuple[list[SongRecord], bool]:
    """Uniform without-replacement sample of the songs in one bin.

    Returns ``(songs, empty)``; an unpopulated bin yields ``([], True)``
    rather than an error, since extracted positions may legitimately point
    at empty space. Deterministic for a fixed seed.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    ids = index.bin_song_ids.get(tuple(int(i) for i in position), ())
    if not ids:
        return [], True
    rng = derive_rng(seed, "sampling")
    k = min(cap, len(ids))
    chosen = rng.choice(len(ids), size=k, replace=False)
    return [songs_by_id[ids[i]] for i in sorted(chosen)], False


# --- index persistence -------------------------------------------------------

def index_to_dict(index: GroundTruthIndex) -> dict:
    bins = []
    for pos in sorted(index.bin_genre_counts):
        bins.append(
            {
                "position": list(pos),
                "genres": dict(sorted(index.bin_genre_counts[pos].items())),
                "song_ids": list(index.bin_song_ids.get(pos, ())),
            }
        )
    return {
        "schema_version": INDEX_SCHEMA_VERSION,
        "bins_per_dim": index.bins_per_dim,
        "dim_names": list(index.dim_names),
        "total_songs": index.total_songs,
        "bins": bins,
    }


def index_from_dict(data: dict) -> GroundTruthIndex:
    genre_counts = {}
    song_ids = {}
    for entry in data["bins"]:
        pos = tuple(int(i) for i in entry["position"])
        genre_counts[pos] = {str(g): int(c) for g, c in entry["genres"].items()}
        song_ids[pos] = tuple(str(s) for s in entry["song_ids"])
    return GroundTruthIndex(
        bins_per_dim=int(data["bins_per_dim"]),
        dim_names=tuple(data["dim_names"]),
        bin_genre_counts=genre_counts,
        bin_song_ids=song_ids,
        total_songs=int(data["total_songs"]),
    )


def save_index(index: GroundTruthIndex, path) -> None:
    Path(path).write_text(json.dumps(index_to_dict(index), indent=2, sort_keys=True) + "\n")


def load_index(path) -> GroundTruthIndex:
    return index_from_dict(json.loads(Path(path).read_text()))
