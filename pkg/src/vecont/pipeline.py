"""Staged pipeline over one TOML run config.

Stages (each idempotent, each re-runnable on its own):

    synth | ingest -> fit -> index -> extract -> consistency/accuracy/shift
                                   -> project -> report

Every artifact is canonical JSON (sorted keys, two-space indent, trailing
newline) embedding the schema version, a hash of the semantic config, and
the master seed, so identical configs and caches produce byte-identical
artifacts. Output location is excluded from the hash.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import defaults
from .analysis import (
    ACCURACY_MEASURES,
    CONSISTENCY_METRICS,
    accuracy_suite,
    consistency_suite,
    distribution_at_locations,
    shift_suite,
)
from .dataset import (
    SongRecord,
    build_index,
    index_from_dict,
    index_to_dict,
    ingest,
    synthesize,
    write_jsonl,
)
from .errors import ConfigError, MissingArtifact, VecontError
from .extraction import ExtractionSet, FormulationTemplate, LlmConfig, extract_all
from .geometry import PcaModel, fit_pca, hull_2d, project
from .ontology import (
    MUSIC_DIMENSIONS,
    Ontology,
    assign_bins,
    fit_edges,
    occupancy,
    ontology_from_dict,
    ontology_to_dict,
    search_resolution,
)
from .stats import BaselineSpec

ARTIFACT_SCHEMA_VERSION = 1

STAGES = (
    "synth",
    "ingest",
    "fit",
    "index",
    "extract",
    "consistency",
    "accuracy",
    "shift",
    "project",
    "report",
)


@dataclass
class RunConfig:
    """Validated run configuration; paths are resolved against the config file."""

    seed: int
    out_dir: Path
    corpus_source: str                  # "synth" or "file"
    corpus_path: Path | None
    corpus_format: str | None
    synth_songs_per_genre: int
    synth_seed: int
    synth_spread: float
    ontology_n: int | None              # fixed bin count, or None for auto search
    density_threshold: float
    n_max: int
    genres: tuple[str, ...]
    formulations: tuple[FormulationTemplate, ...]
    llm: LlmConfig
    k: int
    sample_cap: int
    baseline_groups: int
    baseline_points: int
    baseline_pairs: int
    shift_baseline_trials: int
    min_count: int
    heatmap_grid: int
    figure_genres: tuple[str, ...]
    arrow_formulation: str | None

    def config_hash(self) -> str:
        """Hash of everything that affects artifact content (not location)."""
        payload = {
            "seed": self.seed,
            "corpus_source": self.corpus_source,
            "corpus_file": self.corpus_path.name if self.corpus_path else None,
            "corpus_format": self.corpus_format,
            "synth": [self.synth_songs_per_genre, self.synth_seed, self.synth_spread],
            "ontology": [self.ontology_n, self.density_threshold, self.n_max],
            "genres": list(self.genres),
            "formulations": [[f.id, f.template] for f in self.formulations],
            "llm": [self.llm.endpoint, self.llm.model, self.llm.temperature,
                    self.llm.max_retries, self.llm.parallelism, self.llm.mode],
            "analysis": [self.k, self.sample_cap, self.baseline_groups,
                         self.baseline_points, self.baseline_pairs,
                         self.shift_baseline_trials, self.min_count, self.heatmap_grid],
            "figures": [list(self.figure_genres), self.arrow_formulation],
        }
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def _load_toml(path: Path) -> dict:
    if sys.version_info >= (3, 11):
        import tomllib as toml
    else:
        import tomli as toml
    with open(path, "rb") as fh:
        return toml.load(fh)


def load_config(path, out_override=None, mode_override: str | None = None) -> RunConfig:
    """Parse and validate a TOML run config, listing every violation at once."""
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config file {path} does not exist"])
    try:
        raw = _load_toml(path)
    except Exception as exc:
        raise ConfigError([f"cannot parse config: {exc}"]) from exc
    base = path.parent
    problems: list[str] = []

    def resolve(p: str | None) -> Path | None:
        return (base / p).resolve() if p else None

    run = raw.get("run", {})
    seed = run.get("seed", 0)
    out_dir = Path(out_override) if out_override else Path(run.get("out_dir", "out"))

    corpus = raw.get("corpus", {})
    source = corpus.get("source")
    if source not in ("synth", "file"):
        problems.append("corpus.source must be 'synth' or 'file'")
    corpus_path = resolve(corpus.get("path"))
    if source == "file" and corpus_path is None:
        problems.append("corpus.path is required for corpus.source = 'file'")
    if source == "synth" and corpus.get("path"):
        problems.append("corpus.path conflicts with corpus.source = 'synth' (exactly one source)")

    ont = raw.get("ontology", {})
    auto = bool(ont.get("auto", False))
    n = ont.get("n")
    if auto and n is not None:
        problems.append("ontology.n conflicts with ontology.auto = true")
    if not auto and n is None:
        problems.append("one of ontology.n or ontology.auto = true is required")
    if n is not None and (not isinstance(n, int) or n < 1):
        problems.append("ontology.n must be a positive integer")
    density = float(ont.get("density_threshold", 0.5))
    if not (0.0 < density <= 1.0):
        problems.append("ontology.density_threshold must be in (0, 1]")
    n_max = int(ont.get("n_max", 64))

    genres = tuple(raw.get("genres", {}).get("names", defaults.DEFAULT_GENRES))
    if not genres:
        problems.append("genres.names must be non-empty")
    if len(set(genres)) != len(genres):
        problems.append("genres.names contains duplicates")

    formulations: tuple[FormulationTemplate, ...] = defaults.DEFAULT_FORMULATIONS
    form_path = resolve(raw.get("formulations", {}).get("path"))
    if form_path is not None:
        if not form_path.exists():
            problems.append(f"formulations.path {form_path} does not exist")
        else:
            try:
                entries = json.loads(form_path.read_text())
                formulations = tuple(
                    FormulationTemplate(e["id"], e["template"]) for e in entries
                )
            except (KeyError, ValueError) as exc:
                problems.append(f"formulations.path is not a valid template list: {exc}")
    if formulations:
        ids = [f.id for f in formulations]
        if len(set(ids)) != len(ids):
            problems.append("formulation ids must be unique")
    else:
        problems.append("formulation list must be non-empty")

    llm_raw = raw.get("llm", {})
    llm = None
    try:
        llm = LlmConfig(
            endpoint=llm_raw.get("endpoint", "https://api.openai.com/v1/chat/completions"),
            model=llm_raw.get("model", "gpt-4o-mini"),
            temperature=float(llm_raw.get("temperature", 0.0)),
            max_retries=int(llm_raw.get("max_retries", 3)),
            timeout=float(llm_raw.get("timeout", 30.0)),
            parallelism=int(llm_raw.get("parallelism", 1)),
            cache_path=str(resolve(llm_raw.get("cache"))) if llm_raw.get("cache") else None,
            mode=mode_override or llm_raw.get("mode", "replay"),
        )
    except ValueError as exc:
        problems.append(f"llm: {exc}")

    ana = raw.get("analysis", {})
    k = int(ana.get("k", 5))
    sample_cap = int(ana.get("sample_cap", 50))
    baseline_groups = int(ana.get("baseline_groups", 1000))
    baseline_points = int(ana.get("baseline_points", 47))
    baseline_pairs = int(ana.get("baseline_pairs", 10000))
    shift_trials = int(ana.get("shift_baseline_trials", 20))
    min_count = int(ana.get("min_count", 0))
    heatmap_grid = int(ana.get("heatmap_grid", 30))
    for name, value in [("k", k), ("sample_cap", sample_cap),
                        ("baseline_groups", baseline_groups),
                        ("baseline_points", baseline_points),
                        ("heatmap_grid", heatmap_grid)]:
        if value < 1:
            problems.append(f"analysis.{name} must be >= 1")

    figs = raw.get("figures", {})
    figure_genres = tuple(figs.get("genres", sorted(genres)[:8]))
    unknown = [g for g in figure_genres if g not in genres]
    if unknown:
        problems.append(f"figures.genres not in genre list: {unknown}")
    arrow = figs.get("arrow_formulation")
    if arrow is not None and formulations and arrow not in {f.id for f in formulations}:
        problems.append(f"figures.arrow_formulation {arrow!r} is not a formulation id")

    if problems:
        raise ConfigError(problems)
    return RunConfig(
        seed=int(seed),
        out_dir=out_dir,
        corpus_source=source,
        corpus_path=corpus_path,
        corpus_format=corpus.get("format"),
        synth_songs_per_genre=int(corpus.get("songs_per_genre", 120)),
        synth_seed=int(corpus.get("synth_seed", seed)),
        synth_spread=float(corpus.get("spread", 0.04)),
        ontology_n=None if auto else int(n),
        density_threshold=density,
        n_max=n_max,
        genres=genres,
        formulations=formulations,
        llm=llm,
        k=k,
        sample_cap=sample_cap,
        baseline_groups=baseline_groups,
        baseline_points=baseline_points,
        baseline_pairs=baseline_pairs,
        shift_baseline_trials=shift_trials,
        min_count=min_count,
        heatmap_grid=heatmap_grid,
        figure_genres=figure_genres,
        arrow_formulation=arrow,
    )


# --- artifact IO -------------------------------------------------------------

def _paths(cfg: RunConfig) -> dict[str, Path]:
    out = cfg.out_dir
    return {
        "corpus": out / "corpus" / "corpus.jsonl",
        "corpus_meta": out / "corpus" / "corpus.meta.json",
        "ontology": out / "ontology" / "ontology.json",
        "index": out / "index" / "index.json",
        "extract": out / "extract" / "extractions.json",
        "consistency": out / "analysis" / "consistency.json",
        "accuracy": out / "analysis" / "accuracy.json",
        "shift": out / "analysis" / "shift.json",
        "project": out / "analysis" / "projection.json",
        "report": out / "report" / "report.json",
        "tables": out / "report" / "tables",
        "figures": out / "figures",
    }


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def read_artifact(path: Path, producing_stage: str) -> dict:
    if not path.exists():
        raise MissingArtifact(str(path), producing_stage)
    return json.loads(path.read_text())


def _meta(cfg: RunConfig) -> dict:
    return {
        "schema_version": ARTIFACT_SCHEMA_VERSION,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
    }


def _load_corpus(cfg: RunConfig) -> list[SongRecord]:
    paths = _paths(cfg)
    if not paths["corpus"].exists():
        stage = "synth" if cfg.corpus_source == "synth" else "ingest"
        raise MissingArtifact(str(paths["corpus"]), stage)
    return ingest(paths["corpus"], format="jsonl").records


def _load_ontology(cfg: RunConfig) -> Ontology:
    data = read_artifact(_paths(cfg)["ontology"], "fit")
    return ontology_from_dict(data["ontology"])


def _load_sets(cfg: RunConfig) -> dict[str, ExtractionSet]:
    data = read_artifact(_paths(cfg)["extract"], "extract")
    sets = {}
    for genre, entry in data["extractions"].items():
        sets[genre] = ExtractionSet(
            genre=genre,
            results={fid: tuple(pos) for fid, pos in entry["results"].items()},
            failures=dict(entry["failures"]),
        )
    return sets


# --- stages -------------------------------------------------------------------

def stage_synth(cfg: RunConfig) -> None:
    if cfg.corpus_source != "synth":
        raise ConfigError(["corpus.source is 'file'; run the ingest stage instead"])
    spec = defaults.default_synth_spec(
        genres=cfg.genres,
        songs_per_genre=cfg.synth_songs_per_genre,
        seed=cfg.synth_seed,
        relative_spread=cfg.synth_spread,
    )
    records = synthesize(spec)
    paths = _paths(cfg)
    paths["corpus"].parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(paths["corpus"], records)
    write_json(paths["corpus_meta"], {
        **_meta(cfg),
        "source": "synth",
        "records": len(records),
        "skipped": 0,
        "skip_reasons": [],
    })


def stage_ingest(cfg: RunConfig) -> None:
    if cfg.corpus_source != "file":
        raise ConfigError(["corpus.source is 'synth'; run the synth stage instead"])
    if cfg.corpus_path is None or not cfg.corpus_path.exists():
        raise ConfigError([f"corpus.path {cfg.corpus_path} does not exist"])
    result = ingest(cfg.corpus_path, format=cfg.corpus_format)
    paths = _paths(cfg)
    paths["corpus"].parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(paths["corpus"], result.records)
    write_json(paths["corpus_meta"], {
        **_meta(cfg),
        "source": "file",
        "records": len(result.records),
        "skipped": result.skipped,
        "skip_reasons": result.skip_reasons,
    })


def stage_fit(cfg: RunConfig) -> None:
    records = _load_corpus(cfg)
    feats = np.asarray([r.features for r in records], dtype=float)
    if cfg.ontology_n is not None:
        ontology = fit_edges(feats, cfg.ontology_n, MUSIC_DIMENSIONS)
        occ = occupancy(ontology, feats)
        auto = False
    else:
        n, occ = search_resolution(feats, cfg.density_threshold, cfg.n_max, MUSIC_DIMENSIONS)
        ontology = fit_edges(feats, n, MUSIC_DIMENSIONS)
        auto = True
    write_json(_paths(cfg)["ontology"], {
        **_meta(cfg),
        "ontology": ontology_to_dict(ontology),
        "occupancy": occ,
        "auto_search": auto,
        "density_threshold": cfg.density_threshold,
    })


def stage_index(cfg: RunConfig) -> None:
    records = _load_corpus(cfg)
    ontology = _load_ontology(cfg)
    index = build_index(ontology, records)
    write_json(_paths(cfg)["index"], {**_meta(cfg), "index": index_to_dict(index)})


def stage_extract(cfg: RunConfig, transport=None) -> None:
    ontology = _load_ontology(cfg)
    sets = extract_all(cfg.genres, cfg.formulations, cfg.llm, ontology, transport=transport)
    payload = {
        genre: {
            "results": {fid: list(pos) for fid, pos in sorted(s.results.items())},
            "failures": dict(sorted(s.failures.items())),
        }
        for genre, s in sorted(sets.items())
    }
    write_json(_paths(cfg)["extract"], {
        **_meta(cfg),
        "mode": cfg.llm.mode,
        "model": cfg.llm.model,
        "extractions": payload,
    })


def stage_consistency(cfg: RunConfig) -> None:
    ontology = _load_ontology(cfg)
    sets = _load_sets(cfg)
    baseline = BaselineSpec(
        space=ontology,
        points_per_group=cfg.baseline_points,
        groups=cfg.baseline_groups,
        seed=cfg.seed,
    )
    report = consistency_suite(sets, ontology, baseline)
    write_json(_paths(cfg)["consistency"], {**_meta(cfg), "consistency": report.to_dict()})


def stage_accuracy(cfg: RunConfig) -> None:
    ontology = _load_ontology(cfg)
    sets = _load_sets(cfg)
    records = _load_corpus(cfg)
    index = build_index(ontology, records)
    songs_by_id = {r.id: r for r in records}
    present = index.genres()
    analyzable = {g: s for g, s in sets.items() if g in present}
    missing = sorted(set(sets) - present)
    distributions = {
        g: distribution_at_locations(s, index, songs_by_id, cap=cfg.sample_cap, seed=cfg.seed)
        for g, s in sorted(analyzable.items())
    }
    report = accuracy_suite(
        analyzable,
        index,
        baseline_pairs=cfg.baseline_pairs,
        seed=cfg.seed,
        min_count=cfg.min_count,
        distributions=distributions,
    )
    payload = report.to_dict()
    payload["excluded"].extend([[g, "GenreAbsent: not in ground-truth index"] for g in missing])
    write_json(_paths(cfg)["accuracy"], {**_meta(cfg), "accuracy": payload})


def stage_shift(cfg: RunConfig) -> None:
    ontology = _load_ontology(cfg)
    sets = _load_sets(cfg)
    report = shift_suite(
        sets, ontology, k=cfg.k, baseline_trials=cfg.shift_baseline_trials, seed=cfg.seed
    )
    write_json(_paths(cfg)["shift"], {**_meta(cfg), "shift": report.to_dict()})


def stage_project(cfg: RunConfig) -> None:
    ontology = _load_ontology(cfg)
    sets = _load_sets(cfg)
    records = _load_corpus(cfg)
    index = build_index(ontology, records)
    n = ontology.bins_per_dim
    pooled = []
    for s in sorted(sets.values(), key=lambda s: s.genre):
        for fid in sorted(s.results):
            pooled.append((np.asarray(s.results[fid], dtype=float) + 0.5) / n)
    if len(pooled) < 2:
        raise MissingArtifact(str(_paths(cfg)["extract"]), "extract")
    model = fit_pca(np.asarray(pooled), k=2)

    per_genre = {}
    for genre, s in sorted(sets.items()):
        if not s.results:
            continue
        fids = sorted(s.results)
        centers = np.asarray([(np.asarray(s.results[f], dtype=float) + 0.5) / n for f in fids])
        pts = project(model, centers)
        hull = hull_2d(pts) if pts.shape[0] >= 1 else []
        centroid2d = project(model, centers.mean(axis=0))
        per_genre[genre] = {
            "points": {f: [float(x), float(y)] for f, (x, y) in zip(fids, pts)},
            "hull": [[float(x), float(y)] for x, y in hull],
            "centroid": [float(centroid2d[0]), float(centroid2d[1])],
        }

    heatmaps = {}
    from .dataset import heatmap_grid as _heatmap_grid

    for genre in cfg.figure_genres:
        if genre not in per_genre or genre not in index.genres():
            continue
        grid = _heatmap_grid(index, genre, model, cfg.heatmap_grid)
        values = [
            [None if grid.bin_counts[i, j] == 0 else float(grid.values[i, j])
             for j in range(grid.values.shape[1])]
            for i in range(grid.values.shape[0])
        ]
        heatmaps[genre] = {
            "values": values,
            "bin_counts": grid.bin_counts.tolist(),
            "x_edges": grid.x_edges.tolist(),
            "y_edges": grid.y_edges.tolist(),
            "points": list(per_genre[genre]["points"].values()),
        }
    write_json(_paths(cfg)["project"], {
        **_meta(cfg),
        "pca": model.to_dict(),
        "per_genre": per_genre,
        "heatmaps": heatmaps,
    })


def _file_hash(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def _figure(cfg: RunConfig, kind: str, payload: dict, axes: dict, stage_hash: str) -> dict:
    return {
        **_meta(cfg),
        "kind": kind,
        "axes": axes,
        "stage_hash": stage_hash,
        "payload": payload,
    }


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() else "-" for c in name.lower()).strip("-")


def stage_report(cfg: RunConfig) -> None:
    paths = _paths(cfg)
    consistency = read_artifact(paths["consistency"], "consistency")["consistency"]
    accuracy = read_artifact(paths["accuracy"], "accuracy")["accuracy"]
    shift = read_artifact(paths["shift"], "shift")["shift"]
    projection = read_artifact(paths["project"], "project")

    report = {
        **_meta(cfg),
        "consistency": {
            "aggregate": consistency["aggregate"],
            "baselines": consistency["baselines"],
            "excluded": consistency["excluded"],
        },
        "accuracy": {
            "baselines": accuracy["baselines"],
            "excluded": accuracy["excluded"],
            "zero_vector_pairs": accuracy["zero_vector_pairs"],
        },
        "shift": {
            "k": shift["k"],
            "n_genres": shift["n_genres"],
            "baseline_global_mean": shift["baseline_global_mean"],
            "baseline_knn_mean": shift["baseline_knn_mean"],
            "skipped": shift["skipped"],
        },
    }
    write_json(paths["report"], report)

    tables = paths["tables"]
    tables.mkdir(parents=True, exist_ok=True)
    _write_csv(
        tables / "consistency.csv",
        ["genre", *CONSISTENCY_METRICS, "total_queries"],
        [
            [g, *[consistency["per_genre"][g][m] for m in CONSISTENCY_METRICS],
             consistency["per_genre"][g]["total_queries"]]
            for g in sorted(consistency["per_genre"])
        ],
    )
    _write_csv(
        tables / "accuracy.csv",
        ["genre", *ACCURACY_MEASURES],
        [
            [g, *[accuracy["per_genre"][g][m] for m in ACCURACY_MEASURES]]
            for g in sorted(accuracy["per_genre"])
        ],
    )
    baseline_rows = []
    for m in CONSISTENCY_METRICS:
        c = consistency["baselines"].get(m)
        if c:
            baseline_rows.append([f"consistency.{m}", c["observed_mean"], c["observed_median"],
                                  c["baseline_mean"], c["baseline_median"], c["p_value"],
                                  c["cohens_d"]])
    for m in ACCURACY_MEASURES:
        c = accuracy["baselines"].get(m)
        if c:
            baseline_rows.append([f"accuracy.{m}", c["observed_mean"], c["observed_median"],
                                  c["baseline_mean"], c["baseline_median"], c["p_value"],
                                  c["cohens_d"]])
    _write_csv(
        tables / "baselines.csv",
        ["metric", "observed_mean", "observed_median", "baseline_mean", "baseline_median",
         "p_value", "cohens_d"],
        baseline_rows,
    )
    _write_csv(
        tables / "shift.csv",
        ["formulation", "n_genres", "zero_shifts", "global_mean_cosine", "knn_mean_cosine"],
        [
            [f, *[shift["per_formulation"][f][c] for c in
                  ("n_genres", "zero_shifts", "global_mean_cosine", "knn_mean_cosine")]]
            for f in sorted(shift["per_formulation"])
        ],
    )

    emit_figure_data(cfg)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def emit_figure_data(cfg: RunConfig) -> list[Path]:
    """One figure-data JSON per chart the report describes.

    Emitters only reshape suite outputs; no statistic is computed here
    beyond selecting and formatting already-reported numbers.
    """
    paths = _paths(cfg)
    consistency_path = paths["consistency"]
    accuracy_path = paths["accuracy"]
    shift_path = paths["shift"]
    project_path = paths["project"]
    consistency = read_artifact(consistency_path, "consistency")["consistency"]
    accuracy = read_artifact(accuracy_path, "accuracy")["accuracy"]
    shift = read_artifact(shift_path, "shift")["shift"]
    projection = read_artifact(project_path, "project")
    fig_dir = paths["figures"]
    fig_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, kind: str, payload: dict, axes: dict, stage_hash: str) -> None:
        p = fig_dir / name
        write_json(p, _figure(cfg, kind, payload, axes, stage_hash))
        written.append(p)

    proj_hash = _file_hash(project_path)
    cons_hash = _file_hash(consistency_path)
    acc_hash = _file_hash(accuracy_path)
    shift_hash = _file_hash(shift_path)

    pc_axes = {"x": "pc1", "y": "pc2"}
    emit("fig01_scatter_hulls.json", "scatter_hulls", {
        "genres": [
            {"genre": g,
             "points": list(projection["per_genre"][g]["points"].values()),
             "hull": projection["per_genre"][g]["hull"]}
            for g in sorted(projection["per_genre"])
        ],
    }, pc_axes, proj_hash)

    emit("fig02_centroid_scatter.json", "centroid_scatter", {
        "points": [
            {"genre": g,
             "x": projection["per_genre"][g]["centroid"][0],
             "y": projection["per_genre"][g]["centroid"][1]}
            for g in sorted(projection["per_genre"])
        ],
    }, pc_axes, proj_hash)

    genres = sorted(consistency["per_genre"])

    def consistency_bars(metric: str, baseline_key: str | None, log_scale: bool) -> dict:
        values = [consistency["per_genre"][g][metric] for g in genres]
        payload = {
            "categories": genres,
            "series": [{"name": metric, "values": values}],
            "log_scale": log_scale,
            "baseline": None,
        }
        if baseline_key and consistency["baselines"].get(baseline_key):
            payload["baseline"] = consistency["baselines"][baseline_key]["baseline_mean"]
        if log_scale:
            payload["zeros"] = [i for i, v in enumerate(values) if v == 0.0]
        return payload

    emit("fig03_query_counts.json", "bar_per_genre", {
        "categories": genres,
        "series": [
            {"name": "total", "values": [consistency["per_genre"][g]["total_queries"] for g in genres]},
            {"name": "unique", "values": [consistency["per_genre"][g]["unique_locations"] for g in genres]},
        ],
        "log_scale": False,
        "baseline": None,
    }, {"x": "genre", "y": "count"}, cons_hash)

    emit("fig04_centroid_distance.json", "bar_per_genre",
         consistency_bars("mean_centroid_distance", "mean_centroid_distance", False),
         {"x": "genre", "y": "mean centroid distance"}, cons_hash)
    emit("fig05_pairwise_distance.json", "bar_per_genre",
         consistency_bars("mean_pairwise_distance", "mean_pairwise_distance", False),
         {"x": "genre", "y": "mean pairwise distance"}, cons_hash)
    emit("fig06_affine_dimension.json", "bar_per_genre",
         consistency_bars("affine_dim", "affine_dim", False),
         {"x": "genre", "y": "affine dimension"}, cons_hash)
    emit("fig07_volume_mean_radius.json", "bar_per_genre",
         consistency_bars("volume_fraction_mean_radius", "volume_fraction_mean_radius", True),
         {"x": "genre", "y": "volume fraction (mean radius)"}, cons_hash)
    emit("fig08_volume_max_radius.json", "bar_per_genre",
         consistency_bars("volume_fraction_max_radius", "volume_fraction_max_radius", True),
         {"x": "genre", "y": "volume fraction (max radius)"}, cons_hash)

    for genre in cfg.figure_genres:
        entry = accuracy["per_genre"].get(genre)
        if not entry or "raw_counts" not in entry:
            continue
        emit(f"fig09_distribution_{_slug(genre)}.json", "distribution_bars", {
            "genre": genre,
            "raw": sorted(entry["raw_counts"].items(), key=lambda kv: (-kv[1], kv[0])),
            "grouped": sorted(entry["token_counts"].items(), key=lambda kv: (-kv[1], kv[0])),
            "empty_bins": entry["empty_bins"],
        }, {"x": "genre label", "y": "count"}, acc_hash)

    for genre, grid in sorted(projection.get("heatmaps", {}).items()):
        emit(f"fig10_heatmap_{_slug(genre)}.json", "heatmap_overlay", {
            "genre": genre,
            "values": grid["values"],
            "bin_counts": grid["bin_counts"],
            "x_edges": grid["x_edges"],
            "y_edges": grid["y_edges"],
            "points": grid["points"],
        }, pc_axes, proj_hash)

    arrow_fid = cfg.arrow_formulation
    if arrow_fid is None or arrow_fid not in shift["per_formulation"]:
        candidates = sorted(shift["per_formulation"])
        arrow_fid = candidates[0] if candidates else None
    if arrow_fid is not None:
        arrows = []
        for g in sorted(projection["per_genre"]):
            entry = projection["per_genre"][g]
            tip = entry["points"].get(arrow_fid)
            if tip is not None:
                arrows.append({"genre": g, "from": entry["centroid"], "to": tip})
        combined = hashlib.sha256((proj_hash + shift_hash).encode()).hexdigest()[:16]
        emit("fig11a_shift_arrows.json", "shift_arrows",
             {"formulation": arrow_fid, "arrows": arrows}, pc_axes, combined)

    fids = sorted(shift["per_formulation"])
    emit("fig11b_global_similarity.json", "similarity_bars", {
        "categories": fids,
        "values": [shift["per_formulation"][f]["global_mean_cosine"] for f in fids],
        "baseline": shift["baseline_global_mean"],
    }, {"x": "formulation", "y": "mean cosine"}, shift_hash)
    emit("fig11c_knn_similarity.json", "similarity_bars", {
        "categories": fids,
        "values": [shift["per_formulation"][f]["knn_mean_cosine"] for f in fids],
        "baseline": shift["baseline_knn_mean"],
    }, {"x": "formulation", "y": "mean cosine (k nearest)"}, shift_hash)
    return written


STAGE_FUNCS = {
    "synth": stage_synth,
    "ingest": stage_ingest,
    "fit": stage_fit,
    "index": stage_index,
    "extract": stage_extract,
    "consistency": stage_consistency,
    "accuracy": stage_accuracy,
    "shift": stage_shift,
    "project": stage_project,
    "report": stage_report,
}


def run_stage(stage: str, cfg: RunConfig, transport=None) -> None:
    if stage not in STAGE_FUNCS:
        raise ConfigError([f"unknown stage {stage!r}; choose from {', '.join(STAGES)}"])
    if stage == "extract":
        stage_extract(cfg, transport=transport)
    else:
        STAGE_FUNCS[stage](cfg)


def run_stages(stages, cfg: RunConfig, transport=None) -> None:
    for stage in stages:
        run_stage(stage, cfg, transport=transport)
