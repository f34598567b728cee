"""Render figure-data JSON files into static images.

This package is a pure consumer of the pipeline's figure-data artifacts: it
reads one JSON payload per chart and draws exactly the numbers in it. It
never recomputes a statistic; a payload missing a field fails loudly
instead of being silently reconstructed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SUPPORTED_SCHEMA_VERSIONS = (1,)

KNOWN_KINDS = (
    "scatter_hulls",
    "centroid_scatter",
    "bar_per_genre",
    "distribution_bars",
    "heatmap_overlay",
    "shift_arrows",
    "similarity_bars",
)


class SchemaMismatch(Exception):
    """The figure data is missing fields or has an unsupported version."""


class UnknownKind(Exception):
    """The figure data names a chart kind this renderer does not know."""


@dataclass(frozen=True)
class RenderJob:
    input_path: Path
    output_path: Path
    dpi: int = 120
    palette: str = "tab20"
    label_budget: int = 20


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise SchemaMismatch(f"{where} is missing required field {key!r}")
    return mapping[key]


def _color(palette: str, i: int):
    cmap = matplotlib.colormaps[palette]
    return cmap(i % cmap.N)


def load_figure_data(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"cannot read figure data {path}: {exc}") from exc
    version = _require(data, "schema_version", str(path))
    if version not in SUPPORTED_SCHEMA_VERSIONS:
        raise SchemaMismatch(
            f"{path}: schema_version {version} unsupported (supported: {SUPPORTED_SCHEMA_VERSIONS})"
        )
    _require(data, "kind", str(path))
    _require(data, "payload", str(path))
    return data


def build_figure(data: dict, palette: str = "tab20", label_budget: int = 20) -> plt.Figure:
    """Build the matplotlib figure for one figure-data document."""
    kind = data["kind"]
    payload = data["payload"]
    axes_meta = data.get("axes", {})
    if kind not in KNOWN_KINDS:
        raise UnknownKind(f"unknown figure kind {kind!r}")
    builder = {
        "scatter_hulls": _scatter_hulls,
        "centroid_scatter": _centroid_scatter,
        "bar_per_genre": _bar_per_genre,
        "distribution_bars": _distribution_bars,
        "heatmap_overlay": _heatmap_overlay,
        "shift_arrows": _shift_arrows,
        "similarity_bars": _similarity_bars,
    }[kind]
    fig = builder(payload, axes_meta, palette, label_budget)
    return fig


def render(job: RenderJob) -> Path:
    """Render one figure-data file to an image, deterministically."""
    data = load_figure_data(job.input_path)
    fig = build_figure(data, palette=job.palette, label_budget=job.label_budget)
    job.output_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(job.output_path, dpi=job.dpi, metadata={"Software": None})
    plt.close(fig)
    return job.output_path


def _new_axes(axes_meta: dict, figsize=(10, 6)):
    fig, ax = plt.subplots(figsize=figsize)
    if "x" in axes_meta:
        ax.set_xlabel(axes_meta["x"])
    if "y" in axes_meta:
        ax.set_ylabel(axes_meta["y"])
    return fig, ax


def _legend_entries(n_total: int, budget: int) -> int:
    """How many individually labeled entries fit before collapsing to other."""
    return n_total if n_total <= budget else budget


def _scatter_hulls(payload, axes_meta, palette, budget):
    genres = _require(payload, "genres", "scatter_hulls payload")
    fig, ax = _new_axes(axes_meta)
    labeled = _legend_entries(len(genres), budget)
    other_shown = False
    for i, entry in enumerate(genres):
        genre = _require(entry, "genre", "scatter_hulls genre entry")
        points = np.asarray(_require(entry, "points", f"genre {genre!r}"), dtype=float)
        hull = np.asarray(_require(entry, "hull", f"genre {genre!r}"), dtype=float)
        color = _color(palette, i)
        if i < labeled:
            label = genre
        elif not other_shown:
            label, other_shown = "other", True
        else:
            label = None
        ax.scatter(points[:, 0], points[:, 1], s=14, color=color, label=label)
        if hull.shape[0] >= 3:
            ring = np.vstack([hull, hull[:1]])
            ax.fill(ring[:, 0], ring[:, 1], color=color, alpha=0.2)
            ax.plot(ring[:, 0], ring[:, 1], color=color, linewidth=1.0)
        elif hull.shape[0] == 2:
            ax.plot(hull[:, 0], hull[:, 1], color=color, linewidth=1.0)
    ax.legend(loc="upper right", fontsize=7, ncol=2)
    ax.set_title("extracted positions and hulls")
    return fig


def _centroid_scatter(payload, axes_meta, palette, budget):
    points = _require(payload, "points", "centroid_scatter payload")
    fig, ax = _new_axes(axes_meta)
    for i, entry in enumerate(points):
        genre = _require(entry, "genre", "centroid entry")
        x = _require(entry, "x", f"centroid {genre!r}")
        y = _require(entry, "y", f"centroid {genre!r}")
        ax.scatter([x], [y], s=22, color=_color(palette, i))
        ax.annotate(genre, (x, y), fontsize=6, xytext=(2, 2), textcoords="offset points")
    ax.set_title("genre centroids")
    return fig


def _draw_baseline(ax, baseline):
    if baseline is not None:
        ax.axhline(baseline, color="crimson", linestyle="--", linewidth=1.2,
                   label=f"baseline {baseline:.3g}")


def _bar_per_genre(payload, axes_meta, palette, budget):
    categories = _require(payload, "categories", "bar payload")
    series = _require(payload, "series", "bar payload")
    baseline = _require(payload, "baseline", "bar payload")
    log_scale = payload.get("log_scale", False)
    fig, ax = _new_axes(axes_meta, figsize=(max(10, 0.22 * len(categories)), 6))
    x = np.arange(len(categories))
    width = 0.8 / max(len(series), 1)
    for si, s in enumerate(series):
        values = np.asarray(_require(s, "values", "bar series"), dtype=float)
        name = _require(s, "name", "bar series")
        offset = (si - (len(series) - 1) / 2) * width
        if log_scale:
            positive = values[values > 0]
            floor = positive.min() / 10 if positive.size else 1e-6
            shown = np.where(values > 0, values, floor)
            ax.bar(x + offset, shown, width=width, label=name,
                   color=_color(palette, si))
            zeros = payload.get("zeros", [i for i, v in enumerate(values) if v == 0.0])
            for zi in zeros:
                ax.plot([zi + offset], [floor], marker="v", color="black", markersize=5)
                ax.annotate("0", (zi + offset, floor), fontsize=6, ha="center",
                            xytext=(0, -10), textcoords="offset points")
            ax.set_yscale("log")
        else:
            ax.bar(x + offset, values, width=width, label=name, color=_color(palette, si))
    _draw_baseline(ax, baseline)
    ax.set_xticks(x)
    ax.set_xticklabels(categories, rotation=90, fontsize=6)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def _top_n_plus_other(pairs, budget):
    if len(pairs) <= budget:
        return pairs
    head = pairs[:budget]
    rest = sum(count for _, count in pairs[budget:])
    return head + [["other", rest]]


def _distribution_bars(payload, axes_meta, palette, budget):
    genre = _require(payload, "genre", "distribution payload")
    raw = _require(payload, "raw", "distribution payload")
    grouped = _require(payload, "grouped", "distribution payload")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(14, 5))
    for ax, pairs, title in ((ax1, raw, "genre labels"), (ax2, grouped, "label tokens")):
        pairs = _top_n_plus_other([list(p) for p in pairs], budget)
        labels = [p[0] for p in pairs]
        counts = [p[1] for p in pairs]
        ax.bar(np.arange(len(labels)), counts, color=_color(palette, 0))
        ax.set_xticks(np.arange(len(labels)))
        ax.set_xticklabels(labels, rotation=90, fontsize=6)
        ax.set_title(f"{genre}: {title}")
    fig.tight_layout()
    return fig


def _heatmap_overlay(payload, axes_meta, palette, budget):
    genre = _require(payload, "genre", "heatmap payload")
    values = _require(payload, "values", "heatmap payload")
    x_edges = np.asarray(_require(payload, "x_edges", "heatmap payload"), dtype=float)
    y_edges = np.asarray(_require(payload, "y_edges", "heatmap payload"), dtype=float)
    points = np.asarray(_require(payload, "points", "heatmap payload"), dtype=float)
    grid = np.array(
        [[np.nan if v is None else float(v) for v in row] for row in values]
    )
    masked = np.ma.masked_invalid(grid)
    fig, ax = _new_axes(axes_meta, figsize=(8, 7))
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("lightgray")  # cells no bin projected into, distinct from 0
    mesh = ax.pcolormesh(x_edges, y_edges, masked.T, cmap=cmap, shading="flat")
    fig.colorbar(mesh, ax=ax, label="mean count per bin")
    if points.size:
        ax.scatter(points[:, 0], points[:, 1], s=18, color="royalblue",
                   edgecolors="white", linewidths=0.4, label="extracted positions")
        ax.legend(loc="upper right", fontsize=7)
    ax.set_title(f"{genre}: ground-truth density vs extracted positions")
    return fig


def _shift_arrows(payload, axes_meta, palette, budget):
    formulation = _require(payload, "formulation", "shift payload")
    arrows = _require(payload, "arrows", "shift payload")
    fig, ax = _new_axes(axes_meta, figsize=(9, 7))
    for i, entry in enumerate(arrows):
        genre = _require(entry, "genre", "arrow entry")
        src = _require(entry, "from", f"arrow {genre!r}")
        dst = _require(entry, "to", f"arrow {genre!r}")
        ax.annotate(
            "",
            xy=(dst[0], dst[1]),
            xytext=(src[0], src[1]),
            arrowprops=dict(arrowstyle="->", color="crimson", lw=1.0),
        )
        ax.plot([src[0]], [src[1]], marker="o", color="black", markersize=3)
        if i < budget:
            ax.annotate(genre, (src[0], src[1]), fontsize=6,
                        xytext=(3, 3), textcoords="offset points")
    ax.set_title(f"centroid shifts for formulation {formulation!r}")
    return fig


def _similarity_bars(payload, axes_meta, palette, budget):
    categories = _require(payload, "categories", "similarity payload")
    values = _require(payload, "values", "similarity payload")
    baseline = _require(payload, "baseline", "similarity payload")
    fig, ax = _new_axes(axes_meta, figsize=(max(10, 0.22 * len(categories)), 5))
    ax.bar(np.arange(len(categories)), values, color=_color(palette, 0))
    _draw_baseline(ax, baseline)
    ax.set_xticks(np.arange(len(categories)))
    ax.set_xticklabels(categories, rotation=90, fontsize=6)
    ax.set_ylim(-1.05, 1.05)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig
