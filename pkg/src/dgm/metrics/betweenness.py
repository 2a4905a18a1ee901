"""Brandes betweenness centrality on the unweighted directed graph.

Exact scores run one BFS + dependency accumulation per source.  The sampled
variant runs the same accumulation from a uniform subset of sources and
scales by ``|V| / pivots``, which is an unbiased estimate of the exact score.

Sources are processed in fixed-size chunks.  Each chunk produces a partial
score vector and the partials are summed in chunk order, so the result does
not depend on how many worker threads ran the chunks.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from ..graph import DependencyGraph
from ..validation import check_graph, check_int, rng_from_seed
from .results import ScoreMap

CHUNK = 64


def _accumulate(adj: list, sources: Sequence[int], n: int) -> list:
    """Sum of single-source dependencies over ``sources``."""
    bc = [0.0] * n
    for s in sources:
        sigma = [0] * n
        dist = [-1] * n
        preds: list = [[] for _ in range(n)]
        order = []
        sigma[s] = 1
        dist[s] = 0
        queue = [s]
        head = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            order.append(v)
            dv = dist[v] + 1
            sv = sigma[v]
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sv
                    preds[w].append(v)
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return bc


def _run(graph: DependencyGraph, sources: Sequence[int], threads: int) -> np.ndarray:
    n = graph.n_nodes
    adj = graph.adjacency_lists("out")
    chunks = [sources[i:i + CHUNK] for i in range(0, len(sources), CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda c: _accumulate(adj, c, n), chunks))
    else:
        partials = [_accumulate(adj, c, n) for c in chunks]
    total = np.zeros(n)
    for p in partials:
        total += np.asarray(p)
    return total


def normalize(raw: np.ndarray, n: int) -> np.ndarray:
    """Divide by ``(n-1)(n-2)``, the number of ordered pairs excluding v."""
    if n <= 2:
        return np.zeros_like(raw)
    return raw / ((n - 1) * (n - 2))


def betweenness_exact(graph: DependencyGraph, threads: int = 1) -> ScoreMap:
    """Raw (unnormalized) betweenness of every node.

    ``diagnostics["normalized"]`` holds the same scores divided by
    ``(|V|-1)(|V|-2)``.
    """
    check_graph(graph)
    threads = check_int(threads, "threads", minimum=1)
    n = graph.n_nodes
    raw = _run(graph, list(range(n)), threads)
    return ScoreMap(
        "betweenness",
        raw,
        graph.node_ids,
        params={"mode": "exact", "normalized": False},
        diagnostics={"sources": n, "normalized": normalize(raw, n)},
    )


def choose_pivots(n: int, pivots: int, seed) -> list:
    rng = rng_from_seed(seed)
    return sorted(rng.choice(n, size=pivots, replace=False).tolist())


def betweenness_sampled(
    graph: DependencyGraph,
    pivots: int,
    seed,
    threads: int = 1,
    sources: Optional[Sequence[int]] = None,
) -> ScoreMap:
    """Pivot-sampling estimate of raw betweenness.

    ``pivots`` sources are drawn uniformly without replacement from a
    generator seeded with ``seed``; the accumulated dependencies are scaled
    by ``|V| / pivots``.  ``sources`` overrides the draw (node indices).
    """
    check_graph(graph)
    n = graph.n_nodes
    threads = check_int(threads, "threads", minimum=1)
    if sources is None:
        pivots = check_int(pivots, "pivots", minimum=1, maximum=max(n, 1))
        sources = choose_pivots(n, pivots, seed)
    else:
        sources = sorted(int(s) for s in sources)
        pivots = len(sources)
    raw = _run(graph, sources, threads) * (n / pivots)
    return ScoreMap(
        "betweenness",
        raw,
        graph.node_ids,
        params={"mode": "sampled", "pivots": pivots, "seed": seed, "normalized": False},
        diagnostics={"sources": pivots, "normalized": normalize(raw, n)},
    )
