"""Renderer tests over the golden figure-data fixtures."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from vecont_figs import RenderJob, SchemaMismatch, UnknownKind, build_figure, render
from vecont_figs.cli import main as figs_main
from vecont_figs.render import KNOWN_KINDS, load_figure_data

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = sorted(FIXTURES.glob("*.json"))


def load(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text())


class TestGoldenRendering:
    def test_fixture_coverage_spans_all_kinds(self):
        kinds = {load_figure_data(p)["kind"] for p in GOLDEN}
        assert kinds == set(KNOWN_KINDS)

    @pytest.mark.parametrize("path", GOLDEN, ids=[p.stem for p in GOLDEN])
    def test_every_golden_figure_renders(self, path, tmp_path):
        out = render(RenderJob(input_path=path, output_path=tmp_path / (path.stem + ".png")))
        assert out.exists()
        assert out.stat().st_size > 1000

    def test_repeated_rendering_pixel_identical(self, tmp_path):
        for path in GOLDEN[:4] + [FIXTURES / "fig10_heatmap_jazz.json"]:
            a = render(RenderJob(input_path=path, output_path=tmp_path / "a.png"))
            first = a.read_bytes()
            b = render(RenderJob(input_path=path, output_path=tmp_path / "b.png"))
            assert first == b.read_bytes(), path.name


class TestBaselines:
    def baseline_lines(self, fig):
        lines = []
        for ax in fig.axes:
            for line in ax.get_lines():
                xs = line.get_xdata()
                ys = line.get_ydata()
                if len(ys) == 2 and ys[0] == ys[1] and len(set(xs)) == 2:
                    lines.append(ys[0])
        return lines

    def test_bar_baseline_matches_payload_exactly(self):
        data = load("fig04_centroid_distance.json")
        fig = build_figure(data)
        assert data["payload"]["baseline"] in self.baseline_lines(fig)

    def test_similarity_baseline_matches_payload_exactly(self):
        data = load("fig11b_global_similarity.json")
        fig = build_figure(data)
        assert data["payload"]["baseline"] in self.baseline_lines(fig)

    def test_no_baseline_no_line(self):
        data = load("fig03_query_counts.json")
        assert data["payload"]["baseline"] is None
        fig = build_figure(data)
        assert self.baseline_lines(fig) == []


class TestStrictness:
    def test_missing_numeric_field_fails_not_recomputed(self):
        data = load("fig11b_global_similarity.json")
        del data["payload"]["values"]
        with pytest.raises(SchemaMismatch, match="values"):
            build_figure(data)

    def test_missing_heatmap_edges_fail(self):
        data = load("fig10_heatmap_jazz.json")
        del data["payload"]["x_edges"]
        with pytest.raises(SchemaMismatch, match="x_edges"):
            build_figure(data)

    def test_missing_baseline_field_fails(self):
        data = load("fig04_centroid_distance.json")
        del data["payload"]["baseline"]
        with pytest.raises(SchemaMismatch, match="baseline"):
            build_figure(data)

    def test_unknown_kind_rejected(self):
        data = load("fig03_query_counts.json")
        data["kind"] = "pie_of_doom"
        with pytest.raises(UnknownKind):
            build_figure(data)

    def test_unsupported_schema_version(self, tmp_path):
        data = load("fig03_query_counts.json")
        data["schema_version"] = 99
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(SchemaMismatch, match="schema_version"):
            load_figure_data(path)


class TestLogScaleZeros:
    def test_zero_values_render_as_floor_markers(self):
        data = load("fig07_volume_mean_radius.json")
        payload = data["payload"]
        payload["series"][0]["values"][0] = 0.0
        payload["zeros"] = [0]
        fig = build_figure(data)
        ax = fig.axes[0]
        assert ax.get_yscale() == "log"
        # the zero is annotated, not silently clamped into the bars
        texts = [t.get_text() for t in ax.texts]
        assert "0" in texts
        markers = [l for l in ax.get_lines() if l.get_marker() == "v"]
        assert markers


class TestLabelBudget:
    def test_legend_collapses_to_top_n_plus_other(self):
        data = load("fig01_scatter_hulls.json")
        assert len(data["payload"]["genres"]) == 50
        fig = build_figure(data, label_budget=5)
        legend = fig.axes[0].get_legend()
        labels = [t.get_text() for t in legend.get_texts()]
        assert len(labels) == 6
        assert labels[-1] == "other"

    def test_legend_lists_every_genre_when_under_budget(self):
        data = load("fig01_scatter_hulls.json")
        data["payload"]["genres"] = data["payload"]["genres"][:3]
        fig = build_figure(data, label_budget=20)
        legend = fig.axes[0].get_legend()
        labels = [t.get_text() for t in legend.get_texts()]
        assert labels == [g["genre"] for g in data["payload"]["genres"]]

    def test_distribution_bars_collapse(self):
        data = load("fig09_distribution_jazz.json")
        fig = build_figure(data, label_budget=4)
        ax = fig.axes[0]
        labels = [t.get_text() for t in ax.get_xticklabels()]
        if len(data["payload"]["raw"]) > 4:
            assert labels[-1] == "other"
            assert len(labels) == 5


class TestCli:
    def test_renders_directory(self, tmp_path):
        out = tmp_path / "imgs"
        code = figs_main(["--in", str(FIXTURES), "--out", str(out)])
        assert code == 0
        assert len(list(out.glob("*.png"))) == len(GOLDEN)

    def test_kind_filter(self, tmp_path):
        out = tmp_path / "imgs"
        code = figs_main(["--in", str(FIXTURES), "--out", str(out), "--kinds", "heatmap_overlay"])
        assert code == 0
        names = {p.name for p in out.glob("*.png")}
        assert names == {
            "fig10_heatmap_classical.png",
            "fig10_heatmap_jazz.png",
            "fig10_heatmap_latin.png",
            "fig10_heatmap_metal.png",
            "fig10_heatmap_rock.png",
        }

    def test_missing_input_dir(self, tmp_path):
        assert figs_main(["--in", str(tmp_path / "none"), "--out", str(tmp_path)]) == 2

    def test_schema_error_exit_code(self, tmp_path):
        bad = tmp_path / "in"
        bad.mkdir()
        (bad / "broken.json").write_text('{"schema_version": 1, "kind": "bar_per_genre"}')
        assert figs_main(["--in", str(bad), "--out", str(tmp_path / "out")]) == 1
