"""Ranked tables and the on-disk report bundle.

A bundle directory holds::

    report.json    versioned envelope: config + one entry per metric
    config.json    the run configuration alone
    timings.json   wall-clock seconds per step (the only non-reproducible file)
    *.csv          per-metric artifacts listed in the envelope

Everything except ``timings.json`` is byte-identical across reruns with the
same configuration and inputs.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import FormatError
from .metrics.results import ScoreMap

FORMAT_VERSION = 1
TIMINGS_FILE = "timings.json"


@dataclass
class RankedRow:
    rank: int
    node_id: str
    score: float
    category: Optional[str] = None
    tags: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"rank": self.rank, "node_id": self.node_id, "score": self.score}
        if self.category is not None:
            out["category"] = self.category
        if self.tags is not None:
            out["tags"] = self.tags
        return out


@dataclass
class RankedTable:
    metric: str
    k: int
    ascending: bool
    rows: list

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def as_tuples(self) -> list:
        return [(r.rank, r.node_id, r.score) for r in self.rows]

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "k": self.k,
            "ascending": self.ascending,
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rank", "node_id", "score", "category", "tags"])
            for r in self.rows:
                w.writerow([r.rank, r.node_id, repr(r.score), r.category or "", r.tags or ""])


def load_metadata(path) -> dict:
    """Read a sidecar ``id,category,tags`` CSV into ``{id: (category, tags)}``."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"id", "category", "tags"} - set(reader.fieldnames or ())
        if missing:
            raise FormatError(f"{path}: metadata header lacks {', '.join(sorted(missing))}")
        for row in reader:
            out[row["id"]] = (row["category"] or None, row["tags"] or None)
    return out


def top_k(
    scores: ScoreMap,
    k: int,
    ascending: bool = False,
    metadata: Optional[dict] = None,
    mask: Optional[np.ndarray] = None,
) -> RankedTable:
    """Highest (or lowest) ``k`` scores; ties go to the smaller node id.

    ``mask`` restricts the candidates (e.g. artifacts only); ``metadata``
    maps node id to ``(category, tags)`` copied into the rows as-is.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    vals = scores.values
    ids = scores.node_ids
    cand = range(len(vals)) if mask is None else np.flatnonzero(mask).tolist()
    sign = 1.0 if ascending else -1.0
    picked = sorted(cand, key=lambda i: (sign * vals[i], ids[i]))[:k]
    meta = metadata or {}
    rows = []
    for rank, i in enumerate(picked, start=1):
        cat, tags = meta.get(ids[i], (None, None))
        rows.append(RankedRow(rank, ids[i], float(vals[i]), cat, tags))
    return RankedTable(scores.name, k, ascending, rows)


@dataclass
class MetricResult:
    """One entry in the report envelope.

    ``summary`` holds small JSON values; ``artifacts`` maps a file name to an
    object with ``to_csv(path)`` or to a callable taking the path.
    """

    name: str
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)


def jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def schema() -> dict:
    text = resources.files("dgm").joinpath("schemas/report.schema.json").read_text("utf-8")
    return json.loads(text)


def build_envelope(results: list, config: dict) -> dict:
    metrics = []
    for r in results:
        metrics.append({
            "name": r.name,
            "params": r.params,
            "diagnostics": r.diagnostics,
            "summary": r.summary,
            "files": sorted(r.artifacts),
        })
    return {
        "format": FORMAT_VERSION,
        "tool": "dgm",
        "config": config,
        "metrics": metrics,
    }


def emit_bundle(results: list, config: dict, outdir, timings: Optional[dict] = None) -> dict:
    """Write ``report.json``, ``config.json``, per-metric CSVs and timings.

    Existing files of the same name are overwritten.  Returns the envelope.
    """
    out = Path(outdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    config = {**config, "format": FORMAT_VERSION}
    envelope = build_envelope(results, config)
    for r in results:
        for fname, art in sorted(r.artifacts.items()):
            target = out / fname
            if hasattr(art, "to_csv"):
                art.to_csv(target)
            elif callable(art):
                art(target)
            else:
                raise TypeError(f"artifact {fname!r} is not writable")
    _write(out / "report.json", dumps(envelope))
    _write(out / "config.json", dumps(config))
    _write(out / TIMINGS_FILE, dumps(timings or {}))
    return jsonable(envelope)


def _write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path, obj) -> None:
    _write(Path(path), dumps(obj))
