"""End-to-end run: load -> sample -> metrics -> power-law fit -> summaries."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import asdict, dataclass, field

from . import __version__
from .exceptions import DegenerateSample, GraphTooSmall, TooFewSamples
from .graph import NodeKind
from .ingest import (
    SampleSpec,
    bfs_sample,
    incoming_dependency_counts,
    load_csv_with_report,
    sample_manifest,
    select_top_seeds,
    write_edges_csv,
    write_nodes_csv,
)
from .metrics import (
    betweenness_exact,
    betweenness_sampled,
    connected_components,
    degree_distribution,
    pagerank,
    small_world,
    summarize_connectivity,
)
from .metrics.results import ScoreMap
from .powerlaw import fit_discrete, loglog_binned
from .report import MetricResult, emit_bundle, load_metadata, top_k, write_json
from .resilience import RemovalPolicy, compare_policies

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Everything needed to reproduce a run.

    Output location and thread count are deliberately absent: neither
    changes any number in the bundle.
    """

    subcommand: str = "pipeline"
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


PIPELINE_DEFAULTS = {
    "k": 5000,
    "depth": 2,
    "direction": "both",
    "alpha": 0.85,
    "tol": 1e-10,
    "max_iter": 200,
    "pivots": None,
    "seed": 0,
    "top_k": 10,
    "bins_per_decade": 10,
    "strict": False,
    "smallworld": False,
    "path_samples": 100,
    "baseline_graphs": 5,
    "resilience": False,
    "resilience_step": 0.01,
    "resilience_max_fraction": 0.5,
    "resilience_trials": 5,
    "relaxed": False,
}


class _Timer:
    def __init__(self):
        self.timings = {}

    def __call__(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.timings[name] = round(time.perf_counter() - self.t0, 6)

        return _Ctx()


def _write_seeds(seeds):
    def write(path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rank", "node_id", "incoming_dependencies"])
            for rank, (nid, c) in enumerate(seeds, start=1):
                w.writerow([rank, nid, c])
    return write


def _write_binned(series):
    def write(path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["degree", "density", "count", "lower", "upper", "width"])
            for row in series.to_rows():
                w.writerow([repr(row["degree"]), repr(row["density"]), row["count"],
                            repr(row["lower"]), repr(row["upper"]), row["width"]])
    return write


def run_pipeline(config: RunConfig, outdir, threads: int = 1) -> dict:
    """Run every step described by ``config`` and write the bundle to ``outdir``."""
    p = {**PIPELINE_DEFAULTS, **config.params}
    config = RunConfig(config.subcommand, dict(config.inputs), p)
    timer = _Timer()
    results = []

    with timer("load"):
        graph, load_report = load_csv_with_report(
            config.inputs["nodes"], config.inputs["edges"], relaxed=p["relaxed"])
    results.append(MetricResult("load", summary={
        "node_count": graph.n_nodes, "edge_count": graph.n_edges, **load_report.to_dict()}))
    metadata = load_metadata(config.inputs["metadata"]) if config.inputs.get("metadata") else None

    with timer("sample"):
        spec = SampleSpec(k=p["k"], depth=p["depth"], direction=p["direction"])
        seeds = select_top_seeds(graph, spec.k)
        g = bfs_sample(graph, seeds, spec)
    manifest = sample_manifest(g, seeds, spec, load_report.skipped_rows + load_report.malformed_rows)
    results.append(MetricResult(
        "sample",
        params={"k": spec.k, "depth": spec.depth, "direction": spec.direction.value},
        summary=manifest,
        artifacts={
            "manifest.json": lambda path: write_json(path, manifest),
            "seeds.csv": _write_seeds(seeds),
            "sample_nodes.csv": lambda path: write_nodes_csv(g, path),
            "sample_edges.csv": lambda path: write_edges_csv(g, path),
        },
    ))

    with timer("degrees"):
        hists = {
            "in": degree_distribution(g, "in"),
            "out": degree_distribution(g, "out"),
            "total": degree_distribution(g, "total"),
            "artifact_in": degree_distribution(g, "in", NodeKind.ARTIFACT),
            "release_out": degree_distribution(g, "out", NodeKind.RELEASE),
        }
        artifacts = {f"degree_{k}.csv": h for k, h in hists.items()}
        deg_summary = {
            "max_in": max(hists["in"].counts, default=0),
            "max_out": max(hists["out"].counts, default=0),
            "mean_total": (hists["total"].total() / g.n_nodes) if g.n_nodes else 0.0,
        }
        if any(k > 0 for k in hists["total"].counts):
            binned = loglog_binned(hists["total"], p["bins_per_decade"])
            artifacts["degree_total_binned.csv"] = _write_binned(binned)
    results.append(MetricResult("degrees", params={"bins_per_decade": p["bins_per_decade"]},
                                summary=deg_summary, artifacts=artifacts))

    if g.n_nodes:
        with timer("pagerank"):
            pr = pagerank(g, p["alpha"], p["tol"], p["max_iter"], strict=p["strict"])
        table = top_k(pr, p["top_k"], metadata=metadata)
        results.append(MetricResult(
            "pagerank", params=pr.params, diagnostics=pr.diagnostics,
            summary={"top": table.to_dict()},
            artifacts={"pagerank.csv": pr, "pagerank_top.csv": table},
        ))

        with timer("betweenness"):
            if p["pivots"] is None or p["pivots"] >= g.n_nodes:
                bc = betweenness_exact(g, threads=threads)
            else:
                bc = betweenness_sampled(g, p["pivots"], p["seed"], threads=threads)
        norm = ScoreMap("betweenness_normalized", bc.diagnostics["normalized"], g.node_ids, bc.params)
        table = top_k(bc, p["top_k"], metadata=metadata)
        results.append(MetricResult(
            "betweenness", params=bc.params, diagnostics={"sources": bc.diagnostics["sources"]},
            summary={"top": table.to_dict(), "top_normalized": top_k(norm, p["top_k"], metadata=metadata).to_dict()},
            artifacts={"betweenness.csv": bc, "betweenness_normalized.csv": norm,
                       "betweenness_top.csv": table},
        ))

        incoming = ScoreMap("incoming_dependencies", incoming_dependency_counts(g).astype(float), g.node_ids)
        low = top_k(incoming, p["top_k"], ascending=True, metadata=metadata,
                    mask=g.kinds == NodeKind.ARTIFACT)
        results.append(MetricResult("lowest_incoming", summary={"bottom": low.to_dict()},
                                    artifacts={"lowest_incoming.csv": low}))

    with timer("components"):
        weak = connected_components(g, "weak")
        strong = connected_components(g, "strong")
        conn = summarize_connectivity(weak, strong)
    results.append(MetricResult("connectivity", summary=conn.to_dict(),
                                artifacts={"wcc.csv": weak, "scc.csv": strong}))

    with timer("powerlaw"):
        try:
            fit = fit_discrete(hists["total"].to_samples())
            fit_summary = fit.to_dict()
        except (TooFewSamples, DegenerateSample) as exc:
            fit_summary = {"skipped": str(exc)}
    results.append(MetricResult("powerlaw", params={"degree": "total"}, summary=fit_summary))

    if p["smallworld"]:
        with timer("smallworld"):
            try:
                sw = small_world(g, p["path_samples"], p["baseline_graphs"], p["seed"])
                sw_summary = sw.to_dict()
            except GraphTooSmall as exc:
                sw_summary = {"skipped": str(exc)}
        results.append(MetricResult("smallworld", params={
            "path_samples": p["path_samples"], "baseline_graphs": p["baseline_graphs"], "seed": p["seed"]},
            summary=sw_summary))

    if p["resilience"] and g.n_nodes:
        with timer("resilience"):
            comp = compare_policies(
                g, [RemovalPolicy.random(p["seed"]), RemovalPolicy.targeted_degree()],
                max_fraction=p["resilience_max_fraction"], step=p["resilience_step"],
                trials=p["resilience_trials"], seed=p["seed"])
        results.append(MetricResult("resilience", params={
            "step": p["resilience_step"], "max_fraction": p["resilience_max_fraction"],
            "trials": p["resilience_trials"]},
            summary={"policies": [c.to_dict() for c in comp]}))

    cfg = {**config.to_dict(), "version": __version__}
    return emit_bundle(results, cfg, outdir, timer.timings)
