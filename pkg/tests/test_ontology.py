"""Binning core: equal-frequency edges, bin assignment, centers, resolution search."""

from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    BEETHOVEN_FEATURES,
    BEETHOVEN_POSITION,
    distinct_uniform_corpus,
)
from vecont.errors import (
    DegenerateDimension,
    EmptyCorpus,
    IndexOutOfRange,
    OutOfDomain,
)
from vecont.ontology import (
    MUSIC_DIMENSIONS,
    DimensionSpec,
    Ontology,
    assign_bin,
    assign_bins,
    bin_center,
    bin_centers,
    fit_edges,
    load_ontology,
    occupancy,
    ontology_from_dict,
    ontology_to_dict,
    save_ontology,
    search_resolution,
    to_native_units,
)

UNIT_2D = (("x", 0.0, 1.0), ("y", 0.0, 1.0))


class TestFitEdges:
    def test_equal_counts_with_distinct_values(self):
        # oracle: sort each column and slice into 6 runs of 100; every run
        # must land in one bin, giving exactly 100 points per bin
        corpus = distinct_uniform_corpus(600, seed=42)
        ont = fit_edges(corpus, 6)
        idx = assign_bins(ont, corpus)
        for j in range(corpus.shape[1]):
            order = np.argsort(corpus[:, j])
            for b in range(6):
                run = idx[order[b * 100:(b + 1) * 100], j]
                assert set(run.tolist()) == {b}
            counts = np.bincount(idx[:, j], minlength=6)
            assert counts.tolist() == [100] * 6

    def test_n1_single_bin_spans_domain(self):
        corpus = distinct_uniform_corpus(50)
        ont = fit_edges(corpus, 1)
        for spec, (name, lo, hi) in zip(ont.dimensions, MUSIC_DIMENSIONS):
            assert spec.edges == (lo, hi)

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpus):
            fit_edges(np.empty((0, 8)), 6)

    def test_constant_dimension_rejected_with_name(self):
        corpus = distinct_uniform_corpus(100)
        corpus[:, 2] = 0.5
        with pytest.raises(DegenerateDimension) as exc:
            fit_edges(corpus, 6)
        assert exc.value.dimension == "speechiness"

    def test_duplicate_heavy_dimension_widens_and_warns(self):
        corpus = distinct_uniform_corpus(1000, seed=3)
        # instrumentalness-like column: most mass exactly at zero
        col = corpus[:, 4].copy()
        col[:800] = 0.0
        corpus[:, 4] = col
        with pytest.warns(RuntimeWarning, match="instrumentalness"):
            ont = fit_edges(corpus, 6)
        edges = np.asarray(ont.dimensions[4].edges)
        assert np.all(np.diff(edges) > 0)
        assert assign_bin(ont, corpus[900])  # still assignable

    def test_out_of_domain_value_rejected(self):
        corpus = distinct_uniform_corpus(100)
        corpus[3, 0] = 1.7
        with pytest.raises(OutOfDomain):
            fit_edges(corpus, 6)

    @given(n_records=st.integers(20, 200), n=st.integers(1, 8), seed=st.integers(0, 10**6))
    @settings(max_examples=30, deadline=None)
    def test_quantile_property_counts_differ_by_at_most_one(self, n_records, n, seed):
        rng = np.random.default_rng(seed)
        col = rng.permutation(np.linspace(0.01, 0.99, n_records))
        ont = fit_edges(col.reshape(-1, 1), n, (("x", 0.0, 1.0),))
        idx = assign_bins(ont, col.reshape(-1, 1))[:, 0]
        counts = np.bincount(idx, minlength=n)
        assert counts.max() - counts.min() <= 1


class TestAssignBin:
    def test_published_conversion_example(self, table1_ontology):
        assert assign_bin(table1_ontology, BEETHOVEN_FEATURES) == BEETHOVEN_POSITION

    def test_domain_minima_map_to_bin_zero(self, table1_ontology):
        minima = [spec.domain_min for spec in table1_ontology.dimensions]
        assert assign_bin(table1_ontology, minima) == (0,) * 8

    def test_interior_edge_belongs_to_lower_bin(self, table1_ontology):
        # energy 0.20 sits exactly on the first boundary and stays in bin 0
        v = list(BEETHOVEN_FEATURES)
        assert v[1] == 0.2
        assert assign_bin(table1_ontology, v)[1] == 0

    def test_domain_maxima_map_to_last_bin(self, table1_ontology):
        maxima = [spec.domain_max for spec in table1_ontology.dimensions]
        assert assign_bin(table1_ontology, maxima) == (5,) * 8

    def test_out_of_domain_raises(self, table1_ontology):
        v = list(BEETHOVEN_FEATURES)
        v[0] = 1.2
        with pytest.raises(OutOfDomain) as exc:
            assign_bin(table1_ontology, v)
        assert exc.value.dimension == "danceability"

    def test_vectorized_matches_scalar(self, table1_ontology):
        rng = np.random.default_rng(7)
        rows = []
        for _ in range(200):
            row = [
                rng.uniform(spec.domain_min, spec.domain_max)
                for spec in table1_ontology.dimensions
            ]
            rows.append(row)
        batch = assign_bins(table1_ontology, np.asarray(rows))
        for row, expected in zip(rows, batch):
            assert assign_bin(table1_ontology, row) == tuple(expected)


class TestBinCenter:
    def test_first_bin_center(self, grid_ontology_6_8):
        c = bin_center(grid_ontology_6_8, (0,) * 8)
        assert np.allclose(c, 1 / 12)

    def test_last_bin_center(self, grid_ontology_6_8):
        c = bin_center(grid_ontology_6_8, (5,) * 8)
        assert np.allclose(c, 11 / 12)

    def test_published_position_centers(self, grid_ontology_6_8):
        # formula oracle: (index + 0.5) / 6 per coordinate
        expected = [(i + 0.5) / 6 for i in BEETHOVEN_POSITION]
        c = bin_center(grid_ontology_6_8, BEETHOVEN_POSITION)
        assert c.tolist() == expected

    def test_centers_on_grid_and_in_unit_cube(self, grid_ontology_6_8):
        rng = np.random.default_rng(0)
        pos = rng.integers(0, 6, size=(100, 8))
        centers = bin_centers(grid_ontology_6_8, pos)
        assert centers.min() >= 0.0 and centers.max() <= 1.0
        assert np.allclose(centers * 6 - 0.5, pos)

    def test_index_out_of_range(self, grid_ontology_6_8):
        with pytest.raises(IndexOutOfRange):
            bin_center(grid_ontology_6_8, (0, 0, 0, 0, 0, 0, 0, 6))


class TestRoundTrip:
    @given(seed=st.integers(0, 10**6), n=st.integers(2, 8))
    @settings(max_examples=25, deadline=None)
    def test_assign_after_lift_recovers_position(self, seed, n):
        rng = np.random.default_rng(seed)
        corpus = distinct_uniform_corpus(300, seed=seed)
        ont = fit_edges(corpus, n)
        pos = tuple(int(i) for i in rng.integers(0, n, size=8))
        lifted = to_native_units(ont, bin_center(ont, pos))
        assert assign_bin(ont, lifted) == pos


class TestResolutionSearch:
    def test_single_bin_always_feasible(self):
        corpus = distinct_uniform_corpus(20)
        n, occ = search_resolution(corpus, 0.5, n_max=1)
        assert (n, occ) == (1, 1.0)

    def test_matches_exhaustive_scan_oracle(self):
        rng = np.random.default_rng(11)
        corpus = rng.uniform(0.001, 0.999, size=(2000, 2))
        threshold = 0.9
        # oracle: brute-force occupancy for every n, pick the largest feasible
        best = None
        for n in range(1, 65):
            ont = fit_edges(corpus, n, UNIT_2D)
            cells = {tuple(row) for row in assign_bins(ont, corpus)}
            occ = len(cells) / (n * n)
            if occ >= threshold:
                best = (n, occ)
        got = search_resolution(corpus, threshold, n_max=64, dimensions=UNIT_2D)
        assert got == best

    def test_large_uniform_corpus_caps_at_n_max(self):
        rng = np.random.default_rng(5)
        corpus = rng.uniform(0.001, 0.999, size=(10000, 2))
        n, occ = search_resolution(corpus, 0.5, n_max=64, dimensions=UNIT_2D)
        assert n == 64
        assert occ >= 0.5

    def test_occupancy_monotone_in_n(self):
        rng = np.random.default_rng(9)
        corpus = rng.uniform(0.001, 0.999, size=(500, 2))
        occs = []
        for n in range(1, 10):
            ont = fit_edges(corpus, n, UNIT_2D)
            occs.append(occupancy(ont, corpus))
        assert all(a >= b for a, b in zip(occs, occs[1:]))


class TestInvariants:
    def test_total_bin_count_exact(self, grid_ontology_6_8):
        assert grid_ontology_6_8.total_bins() == 1_679_616

    def test_dimension_spec_validation(self):
        with pytest.raises(ValueError):
            DimensionSpec("x", 0.0, 1.0, (0.0, 0.5, 0.5, 1.0))
        with pytest.raises(ValueError):
            DimensionSpec("x", 0.0, 1.0, (0.1, 0.5, 1.0))
        with pytest.raises(ValueError):
            Ontology((), 6)

    def test_duplicate_names_rejected(self):
        spec = DimensionSpec("x", 0.0, 1.0, (0.0, 0.5, 1.0))
        with pytest.raises(ValueError):
            Ontology((spec, spec), 2)


class TestSerialization:
    def test_bit_exact_round_trip(self, tmp_path, table1_ontology):
        path = tmp_path / "ontology.json"
        save_ontology(table1_ontology, path)
        loaded = load_ontology(path)
        assert loaded == table1_ontology
        assert ontology_to_dict(loaded) == ontology_to_dict(table1_ontology)

    def test_dict_round_trip_after_fit(self):
        corpus = distinct_uniform_corpus(200, seed=1)
        ont = fit_edges(corpus, 5)
        assert ontology_from_dict(ontology_to_dict(ont)) == ont
