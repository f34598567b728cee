"""Consistency, accuracy, and formulation-shift suites on planted fixtures."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from vecont.analysis import (
    accuracy_suite,
    consistency_suite,
    distribution_at_locations,
    genre_tokens,
    shift_suite,
)
from vecont.dataset import GroundTruthIndex, SongRecord, build_index
from vecont.errors import GenreAbsent, InsufficientGenres
from vecont.extraction import ExtractionSet
from vecont.geometry import ball_volume_fraction
from vecont.ontology import MUSIC_DIMENSIONS, regular_ontology
from vecont.stats import BaselineSpec

GRID = regular_ontology(MUSIC_DIMENSIONS, 6)
SMALL_BASELINE = BaselineSpec(GRID, points_per_group=47, groups=120, seed=99)


def eset(genre: str, positions: dict[str, tuple[int, ...]]) -> ExtractionSet:
    return ExtractionSet(genre=genre, results=positions, failures={})


def repeat_eset(genre: str, position: tuple[int, ...], count: int = 47) -> ExtractionSet:
    return eset(genre, {f"f{i:02d}": position for i in range(count)})


def centers(positions, n=6):
    return (np.asarray(positions, dtype=float) + 0.5) / n


class TestConsistency:
    def test_perfectly_consistent_genre(self):
        report = consistency_suite(
            [repeat_eset("samba", (1, 2, 3, 4, 5, 0, 1, 2))], GRID, SMALL_BASELINE
        )
        m = report.per_genre["samba"]
        assert m.total_queries == 47
        assert m.unique_locations == 1
        assert m.mean_centroid_distance == 0.0
        assert m.mean_pairwise_distance == 0.0
        assert m.affine_dim == 0
        assert m.volume_fraction_mean_radius == 0.0
        assert m.volume_fraction_max_radius == 0.0

    def test_five_point_fixture_matches_hand_computation(self):
        positions = [
            (0, 0, 0, 0, 0, 0, 0, 0),
            (1, 0, 0, 0, 0, 0, 0, 0),
            (0, 1, 0, 0, 0, 0, 0, 0),
            (1, 1, 0, 0, 0, 0, 0, 0),
            (0, 0, 1, 0, 0, 0, 0, 0),
        ]
        s = eset("toy", {f"f{i}": p for i, p in enumerate(positions)})
        report = consistency_suite([s], GRID, SMALL_BASELINE)
        m = report.per_genre["toy"]

        # independent oracle: plain python loops over the bin centers
        pts = [[(i + 0.5) / 6 for i in p] for p in positions]
        cen = [sum(col) / 5 for col in zip(*pts)]
        dists = [math.dist(p, cen) for p in pts]
        pair = [math.dist(a, b) for a, b in itertools.combinations(pts, 2)]
        assert m.unique_locations == 5
        assert m.mean_centroid_distance == pytest.approx(sum(dists) / 5, abs=1e-12)
        assert m.mean_pairwise_distance == pytest.approx(sum(pair) / 10, abs=1e-12)
        assert m.affine_dim == 3  # three independent offsets were planted
        assert m.volume_fraction_mean_radius == pytest.approx(
            ball_volume_fraction(8, sum(dists) / 5), rel=1e-12
        )
        assert m.volume_fraction_max_radius == pytest.approx(
            ball_volume_fraction(8, max(dists)), rel=1e-12
        )

    def test_uniform_random_sets_match_baseline_within_error(self):
        rng = np.random.default_rng(123)
        sets = []
        for g in range(30):
            pos = {
                f"f{i:02d}": tuple(int(x) for x in rng.integers(0, 6, 8)) for i in range(47)
            }
            sets.append(eset(f"g{g:02d}", pos))
        report = consistency_suite(sets, GRID, SMALL_BASELINE)
        for metric in ("mean_centroid_distance", "mean_pairwise_distance"):
            comp = report.baselines[metric]
            # random observed groups should sit within a few standard errors
            assert abs(comp.observed_mean - comp.baseline_mean) < 0.02
            assert comp.p_value > 1e-4

    def test_clustered_sets_beat_baseline(self):
        rng = np.random.default_rng(7)
        sets = []
        for g in range(12):
            base = rng.integers(1, 5, 8)
            pos = {}
            for i in range(47):
                jitter = base.copy()
                if i % 2:
                    j = rng.integers(0, 8)
                    jitter[j] = np.clip(jitter[j] + rng.choice([-1, 1]), 0, 5)
                pos[f"f{i:02d}"] = tuple(int(x) for x in jitter)
            sets.append(eset(f"g{g:02d}", pos))
        report = consistency_suite(sets, GRID, SMALL_BASELINE)
        comp = report.baselines["mean_centroid_distance"]
        assert comp.observed_mean < comp.baseline_mean
        assert comp.p_value < 1e-6
        assert comp.cohens_d < -5

    def test_permutation_invariance_is_exact(self):
        rng = np.random.default_rng(11)
        items = [
            (f"f{i:02d}", tuple(int(x) for x in rng.integers(0, 6, 8))) for i in range(20)
        ]
        fwd = eset("g", dict(items))
        rev = eset("g", dict(reversed(items)))
        a = consistency_suite([fwd], GRID, SMALL_BASELINE).per_genre["g"]
        b = consistency_suite([rev], GRID, SMALL_BASELINE).per_genre["g"]
        assert a == b

    def test_too_few_points_excluded_and_listed(self):
        lonely = eset("lonely", {"f00": (0,) * 8})
        ok = repeat_eset("fine", (2,) * 8, count=5)
        report = consistency_suite([lonely, ok], GRID, SMALL_BASELINE)
        assert "lonely" not in report.per_genre
        assert report.excluded and report.excluded[0][0] == "lonely"
        assert "fine" in report.per_genre

    def test_unique_locations_never_exceed_totals(self):
        rng = np.random.default_rng(13)
        sets = [
            eset(
                f"g{g}",
                {f"f{i}": tuple(int(x) for x in rng.integers(0, 2, 8)) for i in range(9)},
            )
            for g in range(4)
        ]
        report = consistency_suite(sets, GRID, SMALL_BASELINE)
        for m in report.per_genre.values():
            assert m.unique_locations <= m.total_queries
            assert m.affine_dim <= 8

    def test_deterministic_given_seed(self):
        sets = [repeat_eset("a", (1,) * 8, 5), repeat_eset("b", (3,) * 8, 5)]
        r1 = consistency_suite(sets, GRID, SMALL_BASELINE)
        r2 = consistency_suite(sets, GRID, SMALL_BASELINE)
        assert r1.to_dict() == r2.to_dict()


def song(sid, genres, position, ontology=GRID):
    """A song whose features sit exactly at a bin center (native units)."""
    from vecont.ontology import to_native_units

    feats = to_native_units(ontology, centers([position])[0])
    return SongRecord(sid, f"t-{sid}", ((f"a-{sid}", tuple(genres)),), tuple(feats))


class TestDistribution:
    def test_all_locations_empty(self):
        index = GroundTruthIndex(6, GRID.names, {}, {}, 0)
        s = repeat_eset("jazz", (0,) * 8, count=47)
        out = distribution_at_locations(s, index, {}, cap=50, seed=1)
        assert out.raw_counts == {} and out.token_counts == {}
        assert out.empty_bins == 47 and out.sampled_songs == 0

    def test_single_location_single_genre(self):
        records = [song(f"s{i}", ["jazz"], (2,) * 8) for i in range(3)]
        index = build_index(GRID, records)
        s = repeat_eset("jazz", (2,) * 8, count=5)
        out = distribution_at_locations(s, index, {r.id: r for r in records}, cap=50, seed=2)
        # 5 formulations each sample all 3 songs from the same bin
        assert out.raw_counts == {"jazz": 15}
        assert out.empty_bins == 0

    def test_shared_token_sums_over_genres(self):
        records = [
            song("s1", ["indie rock"], (1,) * 8),
            song("s2", ["punk rock"], (1,) * 8),
        ]
        index = build_index(GRID, records)
        s = eset("rock", {"f0": (1,) * 8})
        out = distribution_at_locations(s, index, {r.id: r for r in records}, cap=50, seed=3)
        assert out.raw_counts == {"indie rock": 1, "punk rock": 1}
        # hand count: "rock" appears in both labels
        assert out.token_counts["rock"] == 2
        assert out.token_counts["indie"] == 1 and out.token_counts["punk"] == 1

    def test_full_name_token_at_least_raw_count(self):
        records = [
            song("s1", ["jazz"], (3,) * 8),
            song("s2", ["vocal jazz"], (3,) * 8),
            song("s3", ["jazz"], (3,) * 8),
        ]
        index = build_index(GRID, records)
        s = eset("jazz", {"f0": (3,) * 8})
        out = distribution_at_locations(s, index, {r.id: r for r in records}, cap=50, seed=4)
        assert out.token_counts["jazz"] >= out.raw_counts["jazz"]

    def test_tokenizer_splits_spaces_and_hyphens(self):
        assert genre_tokens("Drum and Bass") == {"drum", "and", "bass"}
        assert genre_tokens("synth-pop") == {"synth", "pop"}


class TestAccuracy:
    def two_genre_setup(self):
        records = [
            song(f"j{i}", ["jazz"], (1, 1, 1, 1, 1, 1, 1, 1)) for i in range(4)
        ] + [
            song(f"r{i}", ["rock"], (4, 4, 4, 4, 4, 4, 4, 4)) for i in range(4)
        ]
        index = build_index(GRID, records)
        sets = [
            eset("jazz", {"f0": (1,) * 8}),
            eset("rock", {"f0": (4,) * 8}),
        ]
        return sets, index

    def test_exact_match_distance_zero_cosines_one(self):
        sets, index = self.two_genre_setup()
        report = accuracy_suite(sets, index, baseline_pairs=100, seed=5)
        for g in ("jazz", "rock"):
            acc = report.per_genre[g]
            assert acc.centroid_euclidean == 0.0
            assert acc.cosine_raw == 1.0
            assert acc.cosine_shifted == 1.0

    def test_three_genre_fixture_matches_hand_computation(self):
        # ground truth: genre g1 split 3:1 over two bins; extraction one bin
        records = (
            [song(f"a{i}", ["g1"], (1, 1, 0, 0, 0, 0, 0, 0)) for i in range(3)]
            + [song("a3", ["g1"], (3, 3, 0, 0, 0, 0, 0, 0))]
            + [song(f"b{i}", ["g2"], (5, 0, 2, 0, 0, 0, 0, 0)) for i in range(2)]
            + [song(f"c{i}", ["g3"], (0, 5, 0, 4, 0, 0, 0, 0)) for i in range(2)]
        )
        index = build_index(GRID, records)
        sets = [
            eset("g1", {"f0": (1, 1, 0, 0, 0, 0, 0, 0), "f1": (2, 2, 0, 0, 0, 0, 0, 0)}),
            eset("g2", {"f0": (5, 0, 2, 0, 0, 0, 0, 0)}),
            eset("g3", {"f0": (0, 5, 0, 4, 0, 0, 0, 0)}),
        ]
        report = accuracy_suite(sets, index, baseline_pairs=50, seed=6)

        # hand oracle for g1, plain python
        gt = [
            0.75 * v + 0.25 * w
            for v, w in zip(
                [(i + 0.5) / 6 for i in (1, 1, 0, 0, 0, 0, 0, 0)],
                [(i + 0.5) / 6 for i in (3, 3, 0, 0, 0, 0, 0, 0)],
            )
        ]
        ext = [
            (a + b) / 2
            for a, b in zip(
                [(i + 0.5) / 6 for i in (1, 1, 0, 0, 0, 0, 0, 0)],
                [(i + 0.5) / 6 for i in (2, 2, 0, 0, 0, 0, 0, 0)],
            )
        ]
        dist = math.dist(ext, gt)
        dot = sum(a * b for a, b in zip(ext, gt))
        cos = dot / (math.hypot(*ext) * math.hypot(*gt))
        sh_ext = [a - 0.5 for a in ext]
        sh_gt = [a - 0.5 for a in gt]
        sh_cos = sum(a * b for a, b in zip(sh_ext, sh_gt)) / (
            math.hypot(*sh_ext) * math.hypot(*sh_gt)
        )
        acc = report.per_genre["g1"]
        assert acc.centroid_euclidean == pytest.approx(dist, abs=1e-12)
        assert acc.cosine_raw == pytest.approx(cos, abs=1e-12)
        assert acc.cosine_shifted == pytest.approx(sh_cos, abs=1e-12)

    def test_scale_sensitivity_of_measures(self):
        sets, index = self.two_genre_setup()
        report = accuracy_suite(sets, index, baseline_pairs=50, seed=7)
        from vecont.geometry import cosine_similarity

        a = report.per_genre["jazz"].extraction_centroid + 0.01
        b = report.per_genre["rock"].ground_truth_centroid
        # raw cosine is invariant to a positive rescaling of both vectors
        assert cosine_similarity(3 * a, 3 * b) == pytest.approx(
            cosine_similarity(a, b), abs=1e-12
        )
        # Euclidean distance is not
        assert abs(np.linalg.norm(3 * a - 3 * b) - np.linalg.norm(a - b)) > 1e-6

    def test_absent_genre_raises(self):
        sets, index = self.two_genre_setup()
        sets.append(eset("polka", {"f0": (0,) * 8}))
        with pytest.raises(GenreAbsent):
            accuracy_suite(sets, index, baseline_pairs=50, seed=8)

    def test_zero_vector_pairs_flagged(self):
        mono = regular_ontology(MUSIC_DIMENSIONS, 1)
        records = [song("a", ["g1"], (0,) * 8, mono), song("b", ["g2"], (0,) * 8, mono)]
        index = build_index(mono, records)
        sets = [eset("g1", {"f0": (0,) * 8}), eset("g2", {"f0": (0,) * 8})]
        report = accuracy_suite(sets, index, baseline_pairs=20, seed=9)
        acc = report.per_genre["g1"]
        assert acc.cosine_shifted is None  # every coordinate sits at 0.5
        assert report.zero_vector_pairs > 0
        assert acc.centroid_euclidean == 0.0

    def test_planted_alignment_beats_mismatched_baseline(self):
        rng = np.random.default_rng(17)
        records = []
        sets = []
        for g in range(10):
            base = tuple(int(x) for x in rng.integers(0, 6, 8))
            for i in range(5):
                records.append(song(f"g{g}-s{i}", [f"genre{g}"], base))
            sets.append(eset(f"genre{g}", {f"f{i}": base for i in range(5)}))
        index = build_index(GRID, records)
        report = accuracy_suite(sets, index, baseline_pairs=2000, seed=10)
        comp = report.baselines["cosine_shifted"]
        assert comp.observed_mean > comp.baseline_mean
        assert comp.p_value < 1e-6
        assert comp.cohens_d > 0

    def test_deterministic(self):
        sets, index = self.two_genre_setup()
        a = accuracy_suite(sets, index, baseline_pairs=500, seed=11).to_dict()
        b = accuracy_suite(sets, index, baseline_pairs=500, seed=11).to_dict()
        assert a == b


class TestShift:
    def planted_identical_sets(self, n_genres=6, n_forms=9):
        """Every genre answers from the same base; shifts vary along dim 0."""
        deltas = [0, 1, 2, 0, 1, 2, 0, 1, 2][:n_forms]
        positions = {
            f"f{i}": (2 + deltas[i], 3, 3, 3, 3, 3, 3, 3) for i in range(n_forms)
        }
        return [eset(f"g{i}", dict(positions)) for i in range(n_genres)]

    def test_identical_shifts_score_exactly_one(self):
        report = shift_suite(self.planted_identical_sets(), GRID, k=2, baseline_trials=0)
        for s in report.per_formulation.values():
            assert s.global_mean_cosine == 1.0
            assert s.knn_mean_cosine == 1.0
            assert s.zero_shifts == 0

    def test_local_equals_global_when_k_covers_all(self):
        rng = np.random.default_rng(19)
        sets = []
        for g in range(7):
            sets.append(
                eset(
                    f"g{g}",
                    {f"f{i}": tuple(int(x) for x in rng.integers(0, 6, 8)) for i in range(6)},
                )
            )
        report = shift_suite(sets, GRID, k=6, baseline_trials=0)
        for s in report.per_formulation.values():
            assert s.knn_mean_cosine == pytest.approx(s.global_mean_cosine, abs=1e-12)

    def test_two_cluster_fixture_local_one_global_lower(self):
        # two tight clusters with mirrored shifts: within-cluster pairs give
        # cosine 1, cross-cluster pairs give -1; 6 within + 9 cross pairs
        deltas = [1, 2, 1, 2, 1, 2]
        a_pos = {f"f{i}": (0 + deltas[i], 0, 0, 0, 0, 0, 0, 0) for i in range(6)}
        b_pos = {f"f{i}": (5 - deltas[i], 5, 5, 5, 5, 5, 5, 5) for i in range(6)}
        sets = [eset(f"a{i}", dict(a_pos)) for i in range(3)] + [
            eset(f"b{i}", dict(b_pos)) for i in range(3)
        ]
        report = shift_suite(sets, GRID, k=2, baseline_trials=0)
        for s in report.per_formulation.values():
            assert s.knn_mean_cosine == 1.0
            assert s.global_mean_cosine == pytest.approx((6 - 9) / 15, abs=1e-12)
            assert s.knn_mean_cosine > s.global_mean_cosine

    def test_zero_shift_vectors_excluded_and_counted(self):
        sets = self.planted_identical_sets(n_genres=4)
        sets.append(eset("still", {f"f{i}": (3,) * 8 for i in range(9)}))
        report = shift_suite(sets, GRID, k=2, baseline_trials=0)
        for s in report.per_formulation.values():
            assert s.zero_shifts == 1
            assert s.global_mean_cosine == 1.0

    def test_insufficient_genres_raises(self):
        with pytest.raises(InsufficientGenres):
            shift_suite([self.planted_identical_sets()[0]], GRID, k=2, baseline_trials=0)

    def test_sparse_formulations_skipped_and_listed(self):
        sets = self.planted_identical_sets(n_genres=4, n_forms=6)
        # one extra formulation only two genres answered
        sets[0].results["rare"] = (1, 1, 1, 1, 1, 1, 1, 1)
        sets[1].results["rare"] = (2, 2, 2, 2, 2, 2, 2, 2)
        report = shift_suite(sets, GRID, k=3, baseline_trials=0)
        assert any(fid == "rare" for fid, _ in report.skipped)
        assert "rare" not in report.per_formulation

    def test_baseline_means_are_small_for_random_data(self):
        report = shift_suite(self.planted_identical_sets(), GRID, k=2, baseline_trials=10, seed=3)
        assert report.baseline_global_mean is not None
        assert abs(report.baseline_global_mean) < 0.2
        assert abs(report.baseline_knn_mean) < 0.3

    def test_shift_vectors_reported_per_formulation(self):
        report = shift_suite(self.planted_identical_sets(), GRID, k=2, baseline_trials=0)
        assert set(report.shift_vectors) == set(report.per_formulation)
        some = next(iter(report.shift_vectors.values()))
        assert all(len(v) == 8 for v in some.values())

    def test_deterministic(self):
        sets = self.planted_identical_sets()
        a = shift_suite(sets, GRID, k=2, baseline_trials=5, seed=4).to_dict()
        b = shift_suite(sets, GRID, k=2, baseline_trials=5, seed=4).to_dict()
        assert a == b
