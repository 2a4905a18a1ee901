"""Command-line entry point: ``dgm <subcommand> ...``.

Exit codes: 0 success, 1 configuration error, 2 input error, 3 PageRank
non-convergence under ``--strict``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .exceptions import DGMError, FormatError, InvalidParameter, NotConverged, SnapshotError, UnknownNode
from .graph import DependencyGraph
from .ingest import SampleSpec, bfs_sample, load_csv_with_report, sample_manifest, select_top_seeds, write_csv
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
from .pipeline import PIPELINE_DEFAULTS, RunConfig, _write_binned, run_pipeline
from .powerlaw import bootstrap_pvalue, fit_discrete, loglog_binned
from .report import MetricResult, dumps, emit_bundle, load_metadata, top_k, write_json
from .resilience import RemovalPolicy, compare_policies
from .synth import GeneratorSpec, generate

log = logging.getLogger("dgm")

EXIT_CONFIG = 1
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("DGM_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"DGM_THREADS must be an integer, got {env!r}") from None
        if value < 1:
            raise ConfigError("DGM_THREADS must be >= 1")
        return value
    return 1


def _add_graph_input(p):
    g = p.add_argument_group("graph input (snapshot or CSV pair)")
    g.add_argument("--graph", help="binary snapshot written by 'dgm ingest'")
    g.add_argument("--nodes", help="nodes CSV (id,kind,timestamp)")
    g.add_argument("--edges", help="edges CSV (src,dst,kind)")
    g.add_argument("--relaxed", action="store_true",
                   help="do not enforce artifact/release endpoint rules (synthetic graphs)")


def _load_graph(args) -> DependencyGraph:
    if args.graph:
        return DependencyGraph.load(args.graph)
    if not (args.nodes and args.edges):
        raise ConfigError("give --graph, or both --nodes and --edges")
    graph, report = load_csv_with_report(args.nodes, args.edges, relaxed=args.relaxed)
    if report.skipped_rows or report.malformed_rows:
        log.warning("skipped %d rows, %d malformed", report.skipped_rows, report.malformed_rows)
    return graph


def _emit(obj, out):
    text = dumps(obj)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# subcommands ---------------------------------------------------------


def cmd_ingest(args):
    if not (args.nodes and args.edges):
        raise ConfigError("ingest needs --nodes and --edges")
    graph, report = load_csv_with_report(args.nodes, args.edges, relaxed=args.relaxed)
    graph.save(args.out)
    _emit({"node_count": graph.n_nodes, "edge_count": graph.n_edges, "snapshot": args.out,
           **report.to_dict()}, args.report)


def cmd_synth(args):
    kw = {"orientation": args.orientation}
    if args.family == "ba":
        spec = GeneratorSpec.preferential_attachment(args.n, args.m, args.seed, **kw)
    elif args.family == "er":
        spec = GeneratorSpec.uniform_random(args.n, args.p, args.seed, **kw)
    else:
        spec = GeneratorSpec.rewired_lattice(args.n, args.k, args.beta, args.seed, **kw)
    graph = generate(spec)
    parts = args.out.split(",")
    if len(parts) != 2:
        raise ConfigError("--out must be NODES.csv,EDGES.csv")
    write_csv(graph, parts[0], parts[1])
    if args.snapshot:
        graph.save(args.snapshot)
    _emit({"family": args.family, "node_count": graph.n_nodes, "edge_count": graph.n_edges,
           "seed": args.seed}, None)


def cmd_sample(args):
    graph = _load_graph(args)
    spec = SampleSpec(args.k, args.depth, args.direction)
    seeds = select_top_seeds(graph, spec.k)
    sample = bfs_sample(graph, seeds, spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(sample, out / "nodes.csv", out / "edges.csv")
    if args.snapshot:
        sample.save(args.snapshot)
    manifest = sample_manifest(sample, seeds, spec)
    write_json(out / "manifest.json", manifest)
    _emit(manifest, None)


def cmd_degrees(args):
    graph = _load_graph(args)
    hist = degree_distribution(graph, args.direction, args.kind)
    if args.out:
        hist.to_csv(args.out)
    if args.binned:
        _write_binned(loglog_binned(hist, args.bins_per_decade))(args.binned)
    _emit({"direction": hist.direction, "kind": hist.kind, "nodes": hist.n_nodes,
           "counts": hist.counts} if not args.out else
          {"direction": hist.direction, "kind": hist.kind, "nodes": hist.n_nodes, "out": args.out}, None)


def _score_output(scores: ScoreMap, args, extra: dict):
    if args.out:
        scores.to_csv(args.out)
    table = top_k(scores, args.top)
    _emit({"metric": scores.name, "params": scores.params, **extra, "top": table.to_dict()}, None)


def cmd_pagerank(args):
    graph = _load_graph(args)
    scores = pagerank(graph, args.alpha, args.tol, args.max_iter, strict=args.strict)
    _score_output(scores, args, {"diagnostics": scores.diagnostics})


def cmd_betweenness(args):
    graph = _load_graph(args)
    threads = _threads(args)
    if args.pivots is None:
        scores = betweenness_exact(graph, threads=threads)
    else:
        if args.seed is None:
            raise ConfigError("--pivots requires an explicit --seed")
        scores = betweenness_sampled(graph, args.pivots, args.seed, threads=threads)
    if args.normalized:
        scores = ScoreMap("betweenness_normalized", scores.diagnostics["normalized"],
                          graph.node_ids, {**scores.params, "normalized": True})
    _score_output(scores, args, {})


def cmd_components(args):
    graph = _load_graph(args)
    weak = connected_components(graph, "weak")
    strong = connected_components(graph, "strong")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        weak.to_csv(out / "wcc.csv")
        strong.to_csv(out / "scc.csv")
    summary = summarize_connectivity(weak, strong)
    if args.table:
        width = max(len(label) for label, _ in summary.rows())
        for label, value in summary.rows():
            print(f"{label:<{width}}  {value}")
    else:
        _emit(summary.to_dict(), None)


def cmd_smallworld(args):
    graph = _load_graph(args)
    stats = small_world(graph, args.path_samples, args.baselines, args.seed)
    _emit(stats.to_dict(), args.out)


def _read_degree_csv(path):
    import csv

    samples = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(h.strip() for h in header or ()) != ("degree", "count"):
            raise FormatError(f"{path}: expected header degree,count")
        for row in reader:
            samples.extend([int(row[0])] * int(row[1]))
    return samples


def cmd_fit_powerlaw(args):
    if args.degrees:
        samples = _read_degree_csv(args.degrees)
    else:
        graph = _load_graph(args)
        samples = degree_distribution(graph, args.direction, args.kind).to_samples()
    fit = fit_discrete(samples, xmin=args.xmin)
    if args.bootstrap:
        if args.seed is None:
            raise ConfigError("--bootstrap requires an explicit --seed")
        fit.p_value = bootstrap_pvalue(samples, fit, args.bootstrap, args.seed)
    _emit(fit.to_dict(), args.out)


_POLICIES = {
    "random": lambda seed, pivots: RemovalPolicy.random(seed),
    "degree": lambda seed, pivots: RemovalPolicy.targeted_degree(),
    "pagerank": lambda seed, pivots: RemovalPolicy.targeted_pagerank(),
    "betweenness": lambda seed, pivots: RemovalPolicy.targeted_betweenness(pivots, seed),
}


def cmd_resilience(args):
    graph = _load_graph(args)
    names = [s.strip() for s in args.policies.split(",") if s.strip()]
    unknown = [n for n in names if n not in _POLICIES]
    if unknown or not names:
        raise ConfigError(f"unknown policies: {', '.join(unknown) or '(none)'}")
    policies = [_POLICIES[n](args.seed, args.pivots) for n in names]
    comp = compare_policies(graph, policies, args.max_fraction, args.step, args.trials,
                            args.seed, cascade=args.cascade)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        import csv

        for c in comp:
            with open(out / f"curve_{c.policy['policy']}.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["fraction_removed", "lcc_fraction"])
                for f, l in zip(c.fraction_removed.tolist(), c.mean_lcc.tolist()):
                    w.writerow([repr(f), repr(l)])
        write_json(out / "comparison.json", {"policies": [c.to_dict() for c in comp]})
    _emit({"policies": [{k: v for k, v in c.to_dict().items()
                         if k in ("policy", "mean_auc", "std_auc", "trials", "seed", "pivots")}
                        for c in comp]}, None)


def cmd_report(args):
    graph = _load_graph(args)
    metadata = load_metadata(args.metadata) if args.metadata else None
    threads = _threads(args)
    pr = pagerank(graph, args.alpha, args.tol, args.max_iter, strict=args.strict)
    if args.pivots is None:
        bc = betweenness_exact(graph, threads=threads)
    else:
        if args.seed is None:
            raise ConfigError("--pivots requires an explicit --seed")
        bc = betweenness_sampled(graph, args.pivots, args.seed, threads=threads)
    from .ingest import incoming_dependency_counts
    from .graph import NodeKind

    incoming = ScoreMap("incoming_dependencies", incoming_dependency_counts(graph).astype(float),
                        graph.node_ids)
    t1 = top_k(pr, args.top, metadata=metadata)
    t2 = top_k(bc, args.top, metadata=metadata)
    t3 = top_k(incoming, args.top, ascending=True, metadata=metadata,
               mask=graph.kinds == NodeKind.ARTIFACT)
    summary = summarize_connectivity(connected_components(graph, "weak"),
                                     connected_components(graph, "strong"))
    results = [
        MetricResult("pagerank_top", params=pr.params, diagnostics=pr.diagnostics,
                     summary=t1.to_dict(), artifacts={"pagerank_top.csv": t1}),
        MetricResult("betweenness_top", params=bc.params, summary=t2.to_dict(),
                     artifacts={"betweenness_top.csv": t2}),
        MetricResult("lowest_incoming", summary=t3.to_dict(), artifacts={"lowest_incoming.csv": t3}),
        MetricResult("connectivity", summary=summary.to_dict()),
    ]
    config = RunConfig("report", _inputs(args), {
        "alpha": args.alpha, "tol": args.tol, "max_iter": args.max_iter, "pivots": args.pivots,
        "seed": args.seed, "top": args.top}).to_dict()
    emit_bundle(results, {**config, "version": __version__}, args.out_dir)
    print(f"report written to {args.out_dir}")


def _inputs(args) -> dict:
    out = {}
    for key in ("graph", "nodes", "edges", "metadata"):
        value = getattr(args, key, None)
        if value:
            out[key] = str(value)
    return out


def cmd_pipeline(args):
    if not (args.nodes and args.edges):
        raise ConfigError("pipeline needs --nodes and --edges")
    params = {key: getattr(args, key) for key in PIPELINE_DEFAULTS}
    config = RunConfig("pipeline", _inputs(args), params)
    envelope = run_pipeline(config, args.out_dir, threads=_threads(args))
    manifest = next(m for m in envelope["metrics"] if m["name"] == "sample")["summary"]
    print(json.dumps({"out_dir": str(args.out_dir), "sample": manifest}, sort_keys=True))


# parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dgm", description="Software dependency graph analysis.")
    parser.add_argument("--version", action="version", version=f"dgm {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="load CSVs and write a binary snapshot")
    _add_graph_input(p)
    p.add_argument("--out", required=True, help="snapshot path")
    p.add_argument("--report", help="write the load report JSON here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic graph")
    p.add_argument("--family", choices=("ba", "er", "ws"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--p", type=float, default=0.01)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--orientation", choices=("directed", "bidirected"), default="directed")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="NODES.csv,EDGES.csv")
    p.add_argument("--snapshot", help="also write a binary snapshot")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sample", help="top-K seeds + BFS expansion")
    _add_graph_input(p)
    p.add_argument("--k", type=int, default=5000)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--direction", choices=("forward", "reverse", "both"), default="both")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--snapshot")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("degrees", help="degree histogram")
    _add_graph_input(p)
    p.add_argument("--direction", choices=("in", "out", "total"), default="total")
    p.add_argument("--kind", choices=("artifact", "release"))
    p.add_argument("--out", help="histogram CSV (degree,count)")
    p.add_argument("--binned", help="log-binned CSV for plotting")
    p.add_argument("--bins-per-decade", type=int, default=10)
    p.set_defaults(func=cmd_degrees)

    p = sub.add_parser("pagerank", help="PageRank scores")
    _add_graph_input(p)
    p.add_argument("--alpha", type=float, default=0.85)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--strict", action="store_true", help="exit 3 if not converged")
    p.add_argument("--out", help="scores CSV (node_id,score)")
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_pagerank)

    p = sub.add_parser("betweenness", help="betweenness centrality")
    _add_graph_input(p)
    p.add_argument("--pivots", type=int, help="sample this many sources (needs --seed)")
    p.add_argument("--seed", type=int)
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_betweenness)

    p = sub.add_parser("components", help="weak/strong components and summary")
    _add_graph_input(p)
    p.add_argument("--out-dir")
    p.add_argument("--table", action="store_true", help="print a human-readable table")
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("smallworld", help="clustering, path length and sigma")
    _add_graph_input(p)
    p.add_argument("--path-samples", type=int, default=100)
    p.add_argument("--baselines", type=int, default=5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_smallworld)

    p = sub.add_parser("fit-powerlaw", help="discrete power-law fit of a degree sample")
    _add_graph_input(p)
    p.add_argument("--degrees", help="histogram CSV (degree,count) instead of a graph")
    p.add_argument("--direction", choices=("in", "out", "total"), default="total")
    p.add_argument("--kind", choices=("artifact", "release"))
    p.add_argument("--xmin", type=int)
    p.add_argument("--bootstrap", type=int, default=0, help="goodness-of-fit replicates")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit_powerlaw)

    p = sub.add_parser("resilience", help="node-removal experiments")
    _add_graph_input(p)
    p.add_argument("--policies", default="random,degree")
    p.add_argument("--max-fraction", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--pivots", type=int, help="sampled betweenness for the betweenness policy")
    p.add_argument("--cascade", action="store_true", help="remove an artifact's releases with it")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_resilience)

    p = sub.add_parser("report", help="ranked tables and connectivity summary bundle")
    _add_graph_input(p)
    p.add_argument("--metadata", help="sidecar CSV id,category,tags")
    p.add_argument("--alpha", type=float, default=0.85)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--pivots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--threads", type=int)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pipeline", help="ingest -> sample -> metrics -> fit -> report")
    p.add_argument("--nodes", required=False)
    p.add_argument("--edges", required=False)
    p.add_argument("--metadata")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--k", type=int, default=PIPELINE_DEFAULTS["k"])
    p.add_argument("--depth", type=int, default=PIPELINE_DEFAULTS["depth"])
    p.add_argument("--direction", choices=("forward", "reverse", "both"),
                   default=PIPELINE_DEFAULTS["direction"])
    p.add_argument("--alpha", type=float, default=PIPELINE_DEFAULTS["alpha"])
    p.add_argument("--tol", type=float, default=PIPELINE_DEFAULTS["tol"])
    p.add_argument("--max-iter", type=int, default=PIPELINE_DEFAULTS["max_iter"])
    p.add_argument("--pivots", type=int)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--top-k", type=int, default=PIPELINE_DEFAULTS["top_k"])
    p.add_argument("--bins-per-decade", type=int, default=PIPELINE_DEFAULTS["bins_per_decade"])
    p.add_argument("--strict", action="store_true")
    p.add_argument("--smallworld", action="store_true")
    p.add_argument("--path-samples", type=int, default=PIPELINE_DEFAULTS["path_samples"])
    p.add_argument("--baseline-graphs", type=int, default=PIPELINE_DEFAULTS["baseline_graphs"])
    p.add_argument("--resilience", action="store_true")
    p.add_argument("--resilience-step", type=float, default=PIPELINE_DEFAULTS["resilience_step"])
    p.add_argument("--resilience-max-fraction", type=float,
                   default=PIPELINE_DEFAULTS["resilience_max_fraction"])
    p.add_argument("--resilience-trials", type=int, default=PIPELINE_DEFAULTS["resilience_trials"])
    p.add_argument("--relaxed", action="store_true")
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "threads", None) is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        args.func(args)
    except ConfigError as exc:
        print(f"dgm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotConverged as exc:
        print(f"dgm: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (OSError, FormatError, SnapshotError, UnknownNode) as exc:
        print(f"dgm: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvalidParameter, ValueError, DGMError) as exc:
        print(f"dgm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
