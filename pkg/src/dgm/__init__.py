"""Structural analysis of large software dependency graphs.

Typical use::

    from dgm import load_csv, select_top_seeds, bfs_sample, SampleSpec, pagerank

    graph = load_csv("nodes.csv", "edges.csv")
    sample = bfs_sample(graph, select_top_seeds(graph, 5000), SampleSpec(depth=2))
    scores = pagerank(sample)
"""

__version__ = "0.1.0"

from .exceptions import *  # noqa: F401,F403
from .graph import DependencyGraph, EdgeKind, GraphBuilder, NodeKind, degree
from .ingest import (
    Direction,
    LoadReport,
    SampleSpec,
    SeedSet,
    bfs_sample,
    load_csv,
    load_csv_with_report,
    select_top_seeds,
    write_csv,
)
from .metrics import (
    ComponentLabeling,
    ConnectivitySummary,
    DegreeHistogram,
    ScoreMap,
    SmallWorldStats,
    betweenness_exact,
    betweenness_sampled,
    connected_components,
    degree_distribution,
    pagerank,
    small_world,
    summarize_connectivity,
)
from .powerlaw import PowerLawFit, fit_discrete, loglog_binned, sample_powerlaw
from .resilience import RemovalPolicy, ResilienceCurve, compare_policies, removal_experiment
from .synth import GeneratorSpec, generate
