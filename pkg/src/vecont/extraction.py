"""Chat-based position extraction: system prompt construction, response
parsing, and a record/replay client for an OpenAI-compatible endpoint.

Recorded responses are keyed by a content hash of (model, system prompt,
user message, attempt), so a cache can only be replayed against the exact
configuration that produced it. Replay mode performs no network traffic.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .errors import (
    CacheMiss,
    MalformedJson,
    MissingDimension,
    NetworkError,
    PositionIndexOutOfRange,
    PositionParseError,
)
from .ontology import Ontology

logger = logging.getLogger(__name__)

API_KEY_ENV_VAR = "VECONT_API_KEY"
RETRY_REMINDER = "Respond with valid JSON only."


@dataclass(frozen=True)
class FormulationTemplate:
    """One natural-language query template with a stable id."""

    id: str
    template: str

    def __post_init__(self):
        if self.template.count("{genre}") != 1:
            raise ValueError(f"{self.id}: template must contain exactly one {{genre}}")

    def render(self, genre: str) -> str:
        return self.template.replace("{genre}", genre)


@dataclass(frozen=True)
class ExtractionSet:
    """Per-genre outcome: position per formulation id, or a failure reason."""

    genre: str
    results: dict[str, tuple[int, ...]]
    failures: dict[str, str]

    def formulation_ids(self) -> set[str]:
        return set(self.results) | set(self.failures)


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    model: str
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 30.0
    parallelism: int = 1
    cache_path: str | None = None
    mode: str = "replay"

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.mode not in ("live", "record", "replay"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode in ("record", "replay") and not self.cache_path:
            raise ValueError(f"{self.mode} mode requires a cache_path")


def build_system_prompt(ontology: Ontology) -> str:
    """Instruction text telling the model how to answer with a position.

    Renders the dimension names in ontology order, the zero-indexed bin
    range, and the per-dimension range strings derived from the fitted
    edges.
    """
    names = ontology.names
    if len(names) == 1:
        names_str = f"['{names[0]}']"
    else:
        quoted = ", ".join(f"'{n}'" for n in names[:-1])
        names_str = f"[{quoted}, and '{names[-1]}']"
    ranges = [
        {
            "name": spec.name,
            "ranges": [
                f"{spec.edges[i]:.2f}-{spec.edges[i + 1]:.2f}"
                for i in range(ontology.bins_per_dim)
            ],
        }
        for spec in ontology.dimensions
    ]
    d = ontology.dim
    hi = ontology.bins_per_dim - 1
    return (
        "Answer in a single JSON object with an entry called 'location', "
        "which is a list of variables formatted as dimension names as keys "
        f"and indices as values. These describe the location in the {d}D vibe "
        f"space, with the dimensions {names_str} taken by a vibe "
        "corresponding to the music you would recommend based on the chat "
        "history. Return variables as indices corresponding to the bucket "
        "values in this pattern (zero-indexed) ensuring that the values are "
        f"within the range of the bins (0-{hi}): {ranges!r}"
    )


def render_position(position, ontology: Ontology) -> str:
    """Dict-form JSON payload for a position; inverse of :func:`parse_position`."""
    loc = {name: int(i) for name, i in zip(ontology.names, position)}
    return json.dumps({"location": loc})


_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)
_OBJECT_RE = re.compile(r"\{.*\}", re.DOTALL)
_ARRAY_RE = re.compile(r"\[.*?\]", re.DOTALL)


def _json_candidates(raw: str):
    text = raw.strip()
    yield text
    for m in _FENCE_RE.finditer(text):
        yield m.group(1).strip()
    m = _OBJECT_RE.search(text)
    if m:
        yield m.group(0)
    m = _ARRAY_RE.search(text)
    if m:
        yield m.group(0)


def _coerce_index(value, dim_name: str, n: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedJson(f"non-numeric index {value!r} for {dim_name!r}")
    if isinstance(value, float) and not value.is_integer():
        raise MalformedJson(f"non-integer index {value!r} for {dim_name!r}")
    idx = int(value)
    if not (0 <= idx <= n - 1):
        raise PositionIndexOutOfRange(dim_name, idx)
    return idx


def parse_position(raw: str, ontology: Ontology) -> tuple[int, ...]:
    """Extract a position from arbitrary model output.

    Accepts ``{"location": {dim: index, ...}}`` (keys matched
    case-insensitively and reordered), ``{"location": [i0, ...]}``, or a
    bare index list, with the JSON possibly fenced or embedded in prose.

    Raises:
        MalformedJson: nothing parseable found.
        MissingDimension: the dict form left out a dimension.
        PositionIndexOutOfRange: an index is outside [0, n-1].
    """
    if not isinstance(raw, str) or not raw.strip():
        raise MalformedJson("empty response")
    obj = None
    for candidate in _json_candidates(raw):
        try:
            obj = json.loads(candidate)
            break
        except json.JSONDecodeError:
            continue
    if obj is None:
        raise MalformedJson(f"no JSON payload found in response: {raw[:120]!r}")

    n = ontology.bins_per_dim
    if isinstance(obj, dict):
        loc = None
        for key, value in obj.items():
            if isinstance(key, str) and key.lower() == "location":
                loc = value
                break
        if loc is None:
            raise MalformedJson("JSON object has no 'location' entry")
    else:
        loc = obj

    if isinstance(loc, dict):
        by_name = {str(k).lower(): v for k, v in loc.items()}
        out = []
        for name in ontology.names:
            if name.lower() not in by_name:
                raise MissingDimension(name)
            out.append(_coerce_index(by_name[name.lower()], name, n))
        return tuple(out)
    if isinstance(loc, list):
        if len(loc) != ontology.dim:
            raise MalformedJson(f"expected {ontology.dim} indices, got {len(loc)}")
        return tuple(
            _coerce_index(v, ontology.names[i], n) for i, v in enumerate(loc)
        )
    raise MalformedJson(f"unsupported 'location' payload: {loc!r}")


# --- cache ------------------------------------------------------------------

def make_cache_key(model: str, system: str, user: str, attempt: int) -> str:
    payload = json.dumps(
        {"model": model, "system": system, "user": user, "attempt": attempt},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResponseCache:
    """Append-only JSONL store of raw responses keyed by request hash."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, str] = {}
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    entry = json.loads(line)
                    self._entries[entry["key"]] = entry["raw_response"]

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key: str) -> str | None:
        return self._entries.get(key)

    def append(self, key: str, request: dict, raw_response: str, timestamp: float | None = None) -> None:
        entry = {
            "key": key,
            "request": request,
            "raw_response": raw_response,
            "timestamp": time.time() if timestamp is None else timestamp,
        }
        line = json.dumps(entry, sort_keys=True)
        with self._lock:
            self._entries[key] = raw_response
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")


# --- client -----------------------------------------------------------------

Transport = Callable[[dict], str]


def live_transport(cfg: LlmConfig) -> Transport:
    """HTTP POST to an OpenAI-compatible chat-completions endpoint."""
    import requests

    api_key = os.environ.get(API_KEY_ENV_VAR, "")

    def send(payload: dict) -> str:
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            resp = requests.post(
                cfg.endpoint, json=payload, headers=headers, timeout=cfg.timeout
            )
            resp.raise_for_status()
            body = resp.json()
            return body["choices"][0]["message"]["content"]
        except NetworkError:
            raise
        except Exception as exc:
            raise NetworkError(str(exc)) from exc

    return send


def _user_message(formulation: FormulationTemplate, genre: str, attempt: int) -> str:
    text = formulation.render(genre)
    if attempt > 0:
        text = f"{text}\n\n{RETRY_REMINDER}"
    return text


def _run_formulation(
    genre: str,
    formulation: FormulationTemplate,
    cfg: LlmConfig,
    ontology: Ontology,
    system: str,
    cache: ResponseCache | None,
    transport: Transport | None,
) -> tuple[str, tuple[int, ...] | None, str | None]:
    """One formulation, with up to cfg.max_retries re-asks on parse failure."""
    last_reason = "NoAttempts"
    for attempt in range(cfg.max_retries + 1):
        user = _user_message(formulation, genre, attempt)
        key = make_cache_key(cfg.model, system, user, attempt)
        raw: str | None
        if cfg.mode == "replay":
            raw = cache.get(key) if cache is not None else None
            if raw is None:
                if attempt == 0:
                    return formulation.id, None, "CacheMiss: no recorded response"
                break
        else:
            payload = {
                "model": cfg.model,
                "messages": [
                    {"role": "system", "content": system},
                    {"role": "user", "content": user},
                ],
                "temperature": cfg.temperature,
            }
            try:
                raw = transport(payload)
            except NetworkError as exc:
                last_reason = f"NetworkError: {exc}"
                continue
            if cfg.mode == "record" and cache is not None:
                cache.append(key, payload, raw)
        try:
            return formulation.id, parse_position(raw, ontology), None
        except PositionParseError as exc:
            last_reason = f"{exc.reason}: {exc}"
    return formulation.id, None, last_reason


def extract_genre(
    genre: str,
    formulations: list[FormulationTemplate] | tuple[FormulationTemplate, ...],
    cfg: LlmConfig,
    ontology: Ontology,
    transport: Transport | None = None,
    cache: ResponseCache | None = None,
) -> ExtractionSet:
    """Query every formulation for one genre and validate the answers.

    A failing formulation becomes a failure entry rather than aborting the
    set, so results and failures always cover every formulation id exactly
    once. In replay mode no network traffic occurs and no transport is
    touched.
    """
    if not formulations:
        raise ValueError("formulation list must be non-empty")
    ids = [f.id for f in formulations]
    if len(set(ids)) != len(ids):
        raise ValueError("formulation ids must be unique")
    system = build_system_prompt(ontology)
    if cache is None and cfg.cache_path:
        if cfg.mode == "replay" and not Path(cfg.cache_path).exists():
            raise CacheMiss(f"replay cache {cfg.cache_path} does not exist")
        cache = ResponseCache(cfg.cache_path)
    if cfg.mode == "replay":
        transport = None
    elif transport is None:
        transport = live_transport(cfg)

    outcomes: dict[str, tuple[tuple[int, ...] | None, str | None]] = {}
    if cfg.mode != "replay" and cfg.parallelism > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            futures = [
                pool.submit(
                    _run_formulation, genre, f, cfg, ontology, system, cache, transport
                )
                for f in formulations
            ]
            for fut in futures:
                fid, pos, reason = fut.result()
                outcomes[fid] = (pos, reason)
    else:
        for f in formulations:
            fid, pos, reason = _run_formulation(
                genre, f, cfg, ontology, system, cache, transport
            )
            outcomes[fid] = (pos, reason)

    results = {fid: pos for fid, (pos, _) in outcomes.items() if pos is not None}
    failures = {fid: reason for fid, (pos, reason) in outcomes.items() if pos is None}
    if failures:
        logger.info("genre %r: %d formulations failed", genre, len(failures))
    return ExtractionSet(genre=genre, results=results, failures=failures)


def extract_all(
    genres,
    formulations,
    cfg: LlmConfig,
    ontology: Ontology,
    transport: Transport | None = None,
) -> dict[str, ExtractionSet]:
    """Run :func:`extract_genre` for every genre, sharing one cache handle."""
    cache = None
    if cfg.cache_path:
        if cfg.mode == "replay" and not Path(cfg.cache_path).exists():
            raise CacheMiss(f"replay cache {cfg.cache_path} does not exist")
        cache = ResponseCache(cfg.cache_path)
    if cfg.mode != "replay" and transport is None:
        transport = live_transport(cfg)
    return {
        genre: extract_genre(genre, formulations, cfg, ontology, transport, cache)
        for genre in genres
    }
