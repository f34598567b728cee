"""The three analysis suites over extraction sets and the ground-truth index:

* consistency: how tightly a genre's extracted positions cluster, against a
  uniform random baseline (unique locations, centroid/pairwise distances,
  affine dimensionality, covered ball volume);
* accuracy: how closely extraction centroids match count-weighted
  ground-truth genre centroids (Euclidean, raw cosine, shifted cosine);
* formulation shift: whether rephrasing a query moves every genre the same
  way, globally and within each genre's nearest-neighbor cluster.

All suites are deterministic given their inputs and seeds, and exclude
rather than abort on genres that cannot be analyzed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import GroundTruthIndex, SongRecord, genre_centroid, sample_songs
from .errors import GenreAbsent, InsufficientGenres, TooFewPoints, ZeroVector
from .extraction import ExtractionSet
from .geometry import (
    affine_dimension,
    ball_volume_fraction,
    centroid,
    cosine_similarity,
    max_centroid_distance,
    mean_centroid_distance,
    mean_pairwise_distance,
)
from .ontology import Ontology, bin_centers
from .stats import (
    BaselineSpec,
    ComparisonResult,
    compare_to_baseline,
    derive_rng,
    derive_seed,
    sample_uniform_positions,
)

CONSISTENCY_METRICS = (
    "unique_locations",
    "mean_centroid_distance",
    "mean_pairwise_distance",
    "affine_dim",
    "volume_fraction_mean_radius",
    "volume_fraction_max_radius",
)

ACCURACY_MEASURES = ("centroid_euclidean", "cosine_raw", "cosine_shifted")


# --- consistency ------------------------------------------------------------

@dataclass(frozen=True)
class GenreConsistency:
    genre: str
    total_queries: int
    unique_locations: int
    mean_centroid_distance: float
    mean_pairwise_distance: float
    affine_dim: int
    volume_fraction_mean_radius: float
    volume_fraction_max_radius: float

    def to_dict(self) -> dict:
        return {
            "total_queries": self.total_queries,
            "unique_locations": self.unique_locations,
            "mean_centroid_distance": self.mean_centroid_distance,
            "mean_pairwise_distance": self.mean_pairwise_distance,
            "affine_dim": self.affine_dim,
            "volume_fraction_mean_radius": self.volume_fraction_mean_radius,
            "volume_fraction_max_radius": self.volume_fraction_max_radius,
        }

    def metric(self, name: str) -> float:
        return float(getattr(self, name))


@dataclass(frozen=True)
class ConsistencyReport:
    per_genre: dict[str, GenreConsistency]
    aggregate: dict[str, dict[str, float]]
    baselines: dict[str, ComparisonResult]
    excluded: list[tuple[str, str]]
    baseline_points_per_group: int
    baseline_groups: int
    baseline_seed: int

    def to_dict(self) -> dict:
        return {
            "per_genre": {g: m.to_dict() for g, m in self.per_genre.items()},
            "aggregate": self.aggregate,
            "baselines": {m: c.to_dict() for m, c in self.baselines.items()},
            "excluded": [list(e) for e in self.excluded],
            "baseline": {
                "points_per_group": self.baseline_points_per_group,
                "groups": self.baseline_groups,
                "seed": self.baseline_seed,
            },
        }


def _cloud_metrics(points: np.ndarray, d: int, n_unique: int, total: int) -> dict[str, float]:
    mcd = mean_centroid_distance(points)
    mxd = max_centroid_distance(points)
    return {
        "total_queries": total,
        "unique_locations": n_unique,
        "mean_centroid_distance": mcd,
        "mean_pairwise_distance": mean_pairwise_distance(points),
        "affine_dim": affine_dimension(points),
        "volume_fraction_mean_radius": ball_volume_fraction(d, mcd),
        "volume_fraction_max_radius": ball_volume_fraction(d, mxd),
    }


def consistency_suite(
    sets: list[ExtractionSet] | dict[str, ExtractionSet],
    ontology: Ontology,
    baseline: BaselineSpec,
) -> ConsistencyReport:
    """Per-genre clustering metrics on bin-center coordinates, each compared
    against the uniform baseline with Welch's t and Cohen's d.

    Genres with fewer than 2 successful positions are excluded and listed.
    """
    if isinstance(sets, dict):
        sets = [sets[g] for g in sorted(sets)]
    per_genre: dict[str, GenreConsistency] = {}
    excluded: list[tuple[str, str]] = []
    d = ontology.dim
    for eset in sorted(sets, key=lambda s: s.genre):
        positions = [eset.results[fid] for fid in sorted(eset.results)]
        if len(positions) < 2:
            err = TooFewPoints(eset.genre, len(positions))
            excluded.append((eset.genre, str(err)))
            continue
        pts = bin_centers(ontology, np.asarray(positions))
        m = _cloud_metrics(pts, d, len(set(positions)), len(positions))
        per_genre[eset.genre] = GenreConsistency(
            genre=eset.genre,
            total_queries=int(m["total_queries"]),
            unique_locations=int(m["unique_locations"]),
            mean_centroid_distance=float(m["mean_centroid_distance"]),
            mean_pairwise_distance=float(m["mean_pairwise_distance"]),
            affine_dim=int(m["affine_dim"]),
            volume_fraction_mean_radius=float(m["volume_fraction_mean_radius"]),
            volume_fraction_max_radius=float(m["volume_fraction_max_radius"]),
        )

    groups = sample_uniform_positions(baseline)
    baseline_values: dict[str, list[float]] = {m: [] for m in CONSISTENCY_METRICS}
    for grp in groups:
        # distinct bin centers correspond one-to-one to distinct positions
        gm = _cloud_metrics(grp, d, np.unique(grp, axis=0).shape[0], grp.shape[0])
        for m in CONSISTENCY_METRICS:
            baseline_values[m].append(float(gm[m]))

    aggregate: dict[str, dict[str, float]] = {}
    baselines: dict[str, ComparisonResult] = {}
    if per_genre:
        for m in CONSISTENCY_METRICS + ("total_queries",):
            obs = [g.metric(m) for g in per_genre.values()]
            aggregate[m] = {"mean": float(np.mean(obs)), "median": float(np.median(obs))}
        for m in CONSISTENCY_METRICS:
            obs = [g.metric(m) for g in per_genre.values()]
            baselines[m] = compare_to_baseline(obs, baseline_values[m])
    return ConsistencyReport(
        per_genre=per_genre,
        aggregate=aggregate,
        baselines=baselines,
        excluded=excluded,
        baseline_points_per_group=baseline.points_per_group,
        baseline_groups=baseline.groups,
        baseline_seed=baseline.seed,
    )


# --- distributions at extracted locations ------------------------------------

def genre_tokens(genre: str) -> set[str]:
    """Word-level tokens of a genre name: lowercase, split on spaces/hyphens."""
    return {t for t in genre.lower().replace("-", " ").split() if t}


@dataclass(frozen=True)
class DistributionResult:
    genre: str
    raw_counts: dict[str, int]
    token_counts: dict[str, int]
    empty_bins: int
    sampled_songs: int

    def to_dict(self) -> dict:
        return {
            "raw_counts": dict(sorted(self.raw_counts.items())),
            "token_counts": dict(sorted(self.token_counts.items())),
            "empty_bins": self.empty_bins,
            "sampled_songs": self.sampled_songs,
        }


def distribution_at_locations(
    eset: ExtractionSet,
    index: GroundTruthIndex,
    songs_by_id: dict[str, SongRecord],
    cap: int = 50,
    seed: int = 0,
) -> DistributionResult:
    """What actually lives where the model pointed.

    Samples up to ``cap`` songs from the bin at every formulation's
    extracted location, pools them across formulations, and counts raw
    genre labels plus word-level genre-name tokens. Empty bins contribute
    nothing and are tallied.
    """
    raw: dict[str, int] = {}
    tokens: dict[str, int] = {}
    empty = 0
    pooled = 0
    for fid in sorted(eset.results):
        pos = eset.results[fid]
        songs, is_empty = sample_songs(
            index, songs_by_id, pos, cap, seed=derive_seed(seed, f"sample:{fid}")
        )
        if is_empty:
            empty += 1
            continue
        pooled += len(songs)
        for song in songs:
            for g in sorted(song.artist_genres):
                raw[g] = raw.get(g, 0) + 1
                for t in sorted(genre_tokens(g)):
                    tokens[t] = tokens.get(t, 0) + 1
    return DistributionResult(
        genre=eset.genre,
        raw_counts=raw,
        token_counts=tokens,
        empty_bins=empty,
        sampled_songs=pooled,
    )


# --- accuracy ---------------------------------------------------------------

@dataclass(frozen=True)
class GenreAccuracy:
    genre: str
    centroid_euclidean: float
    cosine_raw: float | None
    cosine_shifted: float | None
    extraction_centroid: np.ndarray
    ground_truth_centroid: np.ndarray

    def to_dict(self) -> dict:
        return {
            "centroid_euclidean": self.centroid_euclidean,
            "cosine_raw": self.cosine_raw,
            "cosine_shifted": self.cosine_shifted,
            "extraction_centroid": self.extraction_centroid.tolist(),
            "ground_truth_centroid": self.ground_truth_centroid.tolist(),
        }


@dataclass(frozen=True)
class AccuracyReport:
    per_genre: dict[str, GenreAccuracy]
    baselines: dict[str, ComparisonResult | None]
    excluded: list[tuple[str, str]]
    zero_vector_pairs: int
    baseline_pairs: int
    seed: int
    distributions: dict[str, DistributionResult] = field(default_factory=dict)

    def to_dict(self) -> dict:
        per_genre = {}
        for g, acc in self.per_genre.items():
            entry = acc.to_dict()
            if g in self.distributions:
                entry.update(self.distributions[g].to_dict())
            per_genre[g] = entry
        return {
            "per_genre": per_genre,
            "baselines": {
                m: (c.to_dict() if c is not None else None) for m, c in self.baselines.items()
            },
            "excluded": [list(e) for e in self.excluded],
            "zero_vector_pairs": self.zero_vector_pairs,
            "baseline_pairs": self.baseline_pairs,
            "seed": self.seed,
        }


def accuracy_suite(
    sets: list[ExtractionSet] | dict[str, ExtractionSet],
    index: GroundTruthIndex,
    baseline_pairs: int = 10000,
    seed: int = 0,
    min_count: int = 0,
    distributions: dict[str, DistributionResult] | None = None,
) -> AccuracyReport:
    """Extraction centroid vs ground-truth genre centroid, per genre.

    The random baseline pairs extraction centroids with ground-truth
    centroids of mismatched genres (sampled with replacement, identity
    pairs excluded) and computes the same three measures. Shifted cosines
    recenter the unit cube on its midpoint first; pairs whose shifted
    vector vanishes are skipped and counted.

    Raises:
        GenreAbsent: an analyzed genre does not occur in the index.
    """
    if isinstance(sets, dict):
        sets = [sets[g] for g in sorted(sets)]
    sets = sorted(sets, key=lambda s: s.genre)
    per_genre: dict[str, GenreAccuracy] = {}
    excluded: list[tuple[str, str]] = []
    ext_centroids: dict[str, np.ndarray] = {}
    gt_centroids: dict[str, np.ndarray] = {}
    n = index.bins_per_dim
    zero_pairs = 0
    for eset in sets:
        if not eset.results:
            excluded.append((eset.genre, str(TooFewPoints(eset.genre, 0))))
            continue
        gt = genre_centroid(index, eset.genre, min_count=min_count)
        positions = np.asarray(
            [eset.results[fid] for fid in sorted(eset.results)], dtype=float
        )
        ext = centroid((positions + 0.5) / n)
        ext_centroids[eset.genre] = ext
        gt_centroids[eset.genre] = gt.point
        dist = float(np.linalg.norm(ext - gt.point))
        try:
            cos_raw = cosine_similarity(ext, gt.point)
        except ZeroVector:
            cos_raw = None
            zero_pairs += 1
        try:
            cos_shift = cosine_similarity(ext, gt.point, shift=0.5)
        except ZeroVector:
            cos_shift = None
            zero_pairs += 1
        per_genre[eset.genre] = GenreAccuracy(
            genre=eset.genre,
            centroid_euclidean=dist,
            cosine_raw=cos_raw,
            cosine_shifted=cos_shift,
            extraction_centroid=ext,
            ground_truth_centroid=gt.point,
        )

    baselines: dict[str, ComparisonResult | None] = {m: None for m in ACCURACY_MEASURES}
    genres = sorted(per_genre)
    if len(genres) >= 2 and baseline_pairs >= 2:
        rng = derive_rng(seed, "accuracy-baseline")
        gi = rng.integers(0, len(genres), size=baseline_pairs)
        gj = rng.integers(0, len(genres), size=baseline_pairs)
        while True:
            same = gi == gj
            if not same.any():
                break
            gj[same] = rng.integers(0, len(genres), size=int(same.sum()))
        E = np.asarray([ext_centroids[genres[i]] for i in gi])
        T = np.asarray([gt_centroids[genres[j]] for j in gj])
        base_dist = np.linalg.norm(E - T, axis=1)
        base_raw, raw_skipped = _masked_cosines(E, T)
        base_shift, shift_skipped = _masked_cosines(E - 0.5, T - 0.5)
        zero_pairs += raw_skipped + shift_skipped
        observed = {
            "centroid_euclidean": [a.centroid_euclidean for a in per_genre.values()],
            "cosine_raw": [a.cosine_raw for a in per_genre.values() if a.cosine_raw is not None],
            "cosine_shifted": [
                a.cosine_shifted for a in per_genre.values() if a.cosine_shifted is not None
            ],
        }
        base = {
            "centroid_euclidean": base_dist,
            "cosine_raw": base_raw,
            "cosine_shifted": base_shift,
        }
        for m in ACCURACY_MEASURES:
            if len(observed[m]) >= 1 and len(base[m]) >= 2:
                baselines[m] = compare_to_baseline(observed[m], base[m])
    return AccuracyReport(
        per_genre=per_genre,
        baselines=baselines,
        excluded=excluded,
        zero_vector_pairs=zero_pairs,
        baseline_pairs=baseline_pairs,
        seed=seed,
        distributions=distributions or {},
    )


def _masked_cosines(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, int]:
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    ok = (na > 0) & (nb > 0)
    cos = np.einsum("ij,ij->i", A[ok], B[ok]) / (na[ok] * nb[ok])
    return np.clip(cos, -1.0, 1.0), int((~ok).sum())


# --- formulation shift ------------------------------------------------------

@dataclass(frozen=True)
class FormulationShift:
    formulation: str
    n_genres: int
    zero_shifts: int
    global_mean_cosine: float
    knn_mean_cosine: float

    def to_dict(self) -> dict:
        return {
            "n_genres": self.n_genres,
            "zero_shifts": self.zero_shifts,
            "global_mean_cosine": self.global_mean_cosine,
            "knn_mean_cosine": self.knn_mean_cosine,
        }


@dataclass(frozen=True)
class ShiftReport:
    per_formulation: dict[str, FormulationShift]
    shift_vectors: dict[str, dict[str, list[float]]]
    skipped: list[tuple[str, str]]
    k: int
    n_genres: int
    baseline_global_mean: float | None
    baseline_knn_mean: float | None
    baseline_trials: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "per_formulation": {f: s.to_dict() for f, s in self.per_formulation.items()},
            "shift_vectors": self.shift_vectors,
            "skipped": [list(e) for e in self.skipped],
            "k": self.k,
            "n_genres": self.n_genres,
            "baseline_global_mean": self.baseline_global_mean,
            "baseline_knn_mean": self.baseline_knn_mean,
            "baseline_trials": self.baseline_trials,
            "seed": self.seed,
        }


def _pair_cosines(S: np.ndarray, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    """Cosines between rows of S for the given index pairs.

    Bitwise-identical rows get an exact 1.0 so planted identical shifts
    are not blurred by rounding.
    """
    norms = np.linalg.norm(S, axis=1)
    U = S / norms[:, None]
    cos = np.clip(np.einsum("ij,ij->i", U[ii], U[jj]), -1.0, 1.0)
    eq = np.all(S[ii] == S[jj], axis=1)
    cos[eq] = 1.0
    return cos


def _shift_scores(
    shifts: np.ndarray, neighbor_ids: list[list[int]], present: list[int], k: int
) -> tuple[float | None, float | None]:
    """Global and kNN mean cosines for one formulation.

    ``shifts`` holds one nonzero shift vector per participating genre;
    ``present`` maps those rows to global genre indices; ``neighbor_ids``
    lists each global genre's k nearest global genre indices.
    """
    g = shifts.shape[0]
    if g < 2:
        return None, None
    iu, ju = np.triu_indices(g, 1)
    global_mean = float(np.mean(_pair_cosines(shifts, iu, ju)))
    row_of = {gid: r for r, gid in enumerate(present)}
    ii: list[int] = []
    jj: list[int] = []
    for r, gid in enumerate(present):
        for nb in neighbor_ids[gid]:
            if nb in row_of:
                ii.append(r)
                jj.append(row_of[nb])
    if not ii:
        return global_mean, None
    knn_mean = float(np.mean(_pair_cosines(shifts, np.asarray(ii), np.asarray(jj))))
    return global_mean, knn_mean


def _formulation_scores(
    centers_by_genre: list[dict[str, np.ndarray]],
    centroids: np.ndarray,
    fids: list[str],
    k: int,
) -> tuple[dict[str, tuple[float | None, float | None, int, int]], list[list[int]]]:
    """Per-formulation (global, knn, n_genres, zero_shifts) over a genre set."""
    g_total = centroids.shape[0]
    dists = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=2)
    neighbor_ids: list[list[int]] = []
    for i in range(g_total):
        order = [j for j in np.argsort(dists[i], kind="stable") if j != i]
        neighbor_ids.append(order[:k])
    out: dict[str, tuple[float | None, float | None, int, int]] = {}
    for f_idx, fid in enumerate(fids):
        rows = []
        present = []
        for gid in range(g_total):
            point = centers_by_genre[gid].get(fid)
            if point is None:
                continue
            rows.append(point - centroids[gid])
            present.append(gid)
        n_present = len(present)
        S = np.asarray(rows) if rows else np.empty((0, centroids.shape[1]))
        nz = np.linalg.norm(S, axis=1) > 0 if len(rows) else np.zeros(0, dtype=bool)
        zero_shifts = int(len(rows) - nz.sum())
        S = S[nz]
        present = [g for g, keep in zip(present, nz) if keep]
        global_mean, knn_mean = _shift_scores(S, neighbor_ids, present, k)
        out[fid] = (global_mean, knn_mean, n_present, zero_shifts)
    return out, neighbor_ids


def shift_suite(
    sets: list[ExtractionSet] | dict[str, ExtractionSet],
    ontology: Ontology,
    k: int = 5,
    baseline_trials: int = 20,
    seed: int = 0,
) -> ShiftReport:
    """Do different phrasings move all genres the same way?

    For each formulation, the shift vector of a genre is its extracted
    position minus the genre's centroid. The global score is the mean
    cosine over all cross-genre shift pairs; the local score restricts
    pairs to each genre's k nearest genre centroids (nearest in the
    extraction space, self excluded). Zero-length shifts are excluded from
    pairing and counted. Formulations shared by fewer than k+1 genres are
    skipped and listed; the suite raises only when no formulation
    qualifies.
    """
    if isinstance(sets, dict):
        sets = [sets[g] for g in sorted(sets)]
    sets = sorted(sets, key=lambda s: s.genre)
    usable = [s for s in sets if s.results]
    genres = [s.genre for s in usable]
    if len(genres) < 2:
        raise InsufficientGenres("*", "shift analysis needs at least 2 genres with results")
    n = ontology.bins_per_dim
    centers_by_genre: list[dict[str, np.ndarray]] = []
    centroids = []
    for s in usable:
        centers = {
            fid: (np.asarray(s.results[fid], dtype=float) + 0.5) / n
            for fid in sorted(s.results)
        }
        centers_by_genre.append(centers)
        centroids.append(centroid(np.asarray(list(centers.values()))))
    centroids = np.asarray(centroids)

    fids = sorted({fid for s in usable for fid in s.results})
    raw_scores, _ = _formulation_scores(centers_by_genre, centroids, fids, k)

    per_formulation: dict[str, FormulationShift] = {}
    skipped: list[tuple[str, str]] = []
    shift_vectors: dict[str, dict[str, list[float]]] = {}
    for fid in fids:
        global_mean, knn_mean, n_present, zero_shifts = raw_scores[fid]
        if n_present < k + 1 or global_mean is None or knn_mean is None:
            skipped.append((fid, str(InsufficientGenres(fid))))
            continue
        per_formulation[fid] = FormulationShift(
            formulation=fid,
            n_genres=n_present,
            zero_shifts=zero_shifts,
            global_mean_cosine=global_mean,
            knn_mean_cosine=knn_mean,
        )
        vectors = {}
        for gid, genre in enumerate(genres):
            point = centers_by_genre[gid].get(fid)
            if point is not None:
                vectors[genre] = (point - centroids[gid]).tolist()
        shift_vectors[fid] = vectors
    if not per_formulation:
        raise InsufficientGenres("*", f"no formulation is shared by at least {k + 1} genres")

    baseline_global = None
    baseline_knn = None
    if baseline_trials > 0:
        rng = derive_rng(seed, "shift-baseline")
        g_count = len(genres)
        f_count = len(fids)
        d = ontology.dim
        glob_vals: list[float] = []
        knn_vals: list[float] = []
        for _ in range(baseline_trials):
            idx = rng.integers(0, n, size=(g_count, f_count, d))
            centers = (idx + 0.5) / n
            trial_centers = [
                {fid: centers[g, i] for i, fid in enumerate(fids)} for g in range(g_count)
            ]
            trial_centroids = centers.mean(axis=1)
            scores, _ = _formulation_scores(trial_centers, trial_centroids, fids, k)
            for gm, km, n_present, _zero in scores.values():
                if n_present >= k + 1 and gm is not None and km is not None:
                    glob_vals.append(gm)
                    knn_vals.append(km)
        if glob_vals:
            baseline_global = float(np.mean(glob_vals))
            baseline_knn = float(np.mean(knn_vals))

    return ShiftReport(
        per_formulation=per_formulation,
        shift_vectors=shift_vectors,
        skipped=skipped,
        k=k,
        n_genres=len(genres),
        baseline_global_mean=baseline_global,
        baseline_knn_mean=baseline_knn,
        baseline_trials=baseline_trials,
        seed=seed,
    )
