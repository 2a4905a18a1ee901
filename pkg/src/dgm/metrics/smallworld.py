"""Small-world coefficient on the undirected view of the graph.

sigma = (C / C_rand) / (L / L_rand), where C is the mean local clustering
coefficient, L the mean shortest-path length inside the largest connected
component (estimated from sampled BFS sources), and the ``_rand`` values come
from degree-preserving rewirings (double edge swaps) of the same graph.
sigma > 1 is the usual small-world criterion.
"""
from __future__ import annotations

import numpy as np
from scipy import sparse

from ..exceptions import GraphTooSmall
from ..graph import DependencyGraph
from ..validation import check_graph, check_int, rng_from_seed
from .components import weak_roots
from .results import SmallWorldStats

# upper bound on intermediate nonzeros per clustering chunk
_CHUNK_BUDGET = 20_000_000


def _adjacency(indptr: np.ndarray, indices: np.ndarray) -> sparse.csr_matrix:
    n = len(indptr) - 1
    return sparse.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, n))


def local_clustering(indptr: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Exact local clustering coefficient per node of a simple undirected graph."""
    n = len(indptr) - 1
    deg = np.diff(indptr)
    a = _adjacency(indptr, indices)
    # work estimate per row: sum of neighbour degrees
    cost = np.add.reduceat(deg[indices], indptr[:-1]) if len(indices) else np.zeros(n)
    cost = np.where(deg > 0, cost, 0)
    tri = np.zeros(n)
    start = 0
    while start < n:
        stop = start + 1
        acc = cost[start]
        while stop < n and acc + cost[stop] <= _CHUNK_BUDGET:
            acc += cost[stop]
            stop += 1
        rows = a[start:stop]
        tri[start:stop] = np.asarray((rows @ a).multiply(rows).sum(axis=1)).ravel() / 2.0
        start = stop
    pairs = deg * (deg - 1) / 2.0
    out = np.zeros(n)
    ok = deg > 1
    out[ok] = tri[ok] / pairs[ok]
    return out


def _bfs_distances(indptr: np.ndarray, indices: np.ndarray, source: int, n: int) -> np.ndarray:
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while len(frontier):
        level += 1
        starts = indptr[frontier]
        lens = indptr[frontier + 1] - starts
        total = int(lens.sum())
        if not total:
            break
        offs = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(total)
        nb = np.unique(indices[offs])
        nb = nb[dist[nb] < 0]
        dist[nb] = level
        frontier = nb
    return dist


def mean_path_length(indptr, indices, path_samples: int, rng: np.random.Generator) -> float:
    """Mean shortest-path length from sampled sources to all other LCC nodes."""
    n = len(indptr) - 1
    src = np.repeat(np.arange(n), np.diff(indptr))
    roots = weak_roots(n, src, indices)
    uniq, counts = np.unique(roots, return_counts=True)
    lcc_root = uniq[np.lexsort((uniq, -counts))[0]]
    members = np.flatnonzero(roots == lcc_root)
    if len(members) < 2:
        return 0.0
    k = min(path_samples, len(members))
    sources = np.sort(rng.choice(members, size=k, replace=False))
    total = 0
    pairs = 0
    for s in sources.tolist():
        d = _bfs_distances(indptr, indices, s, n)
        reach = d > 0
        total += int(d[reach].sum())
        pairs += int(reach.sum())
    return total / pairs


def rewire(indptr, indices, rng: np.random.Generator, swaps_per_edge: int = 10):
    """Degree-preserving randomization by double edge swaps.

    Swaps that would create a self-loop or a parallel edge are rejected.
    Returns the new ``(indptr, indices)``.
    """
    n = len(indptr) - 1
    src = np.repeat(np.arange(n), np.diff(indptr))
    keep = src < indices
    eu = src[keep].tolist()
    ev = indices[keep].tolist()
    m = len(eu)
    if m < 2:
        return indptr, indices
    present = {(a, b) for a, b in zip(eu, ev)}
    attempts = swaps_per_edge * m
    picks = rng.integers(0, m, size=(attempts, 2)).tolist()
    flips = rng.random(attempts).tolist()
    for (i, j), flip in zip(picks, flips):
        if i == j:
            continue
        a, b = eu[i], ev[i]
        c, d = eu[j], ev[j]
        if flip < 0.5:
            c, d = d, c
        # (a,b),(c,d) -> (a,d),(c,b)
        if a == d or c == b:
            continue
        e1 = (a, d) if a < d else (d, a)
        e2 = (c, b) if c < b else (b, c)
        if e1 in present or e2 in present or e1 == e2:
            continue
        present.discard((a, b) if a < b else (b, a))
        present.discard((eu[j], ev[j]))
        present.add(e1)
        present.add(e2)
        eu[i], ev[i] = e1
        eu[j], ev[j] = e2
    u = np.array(eu + ev, dtype=np.int64)
    v = np.array(ev + eu, dtype=np.int64)
    order = np.lexsort((v, u))
    new_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(u, minlength=n), out=new_indptr[1:])
    return new_indptr, v[order]


def small_world(
    graph: DependencyGraph,
    path_samples: int = 100,
    baseline_graphs: int = 5,
    seed=0,
    swaps_per_edge: int = 10,
) -> SmallWorldStats:
    """Clustering, sampled path length and sigma against rewired baselines.

    Edge direction is ignored throughout.  Deterministic for a given seed.
    """
    check_graph(graph)
    if graph.n_nodes < 4:
        raise GraphTooSmall(f"small-world statistics need at least 4 nodes, got {graph.n_nodes}")
    path_samples = check_int(path_samples, "path_samples", minimum=1)
    baseline_graphs = check_int(baseline_graphs, "baseline_graphs", minimum=1)
    rng = rng_from_seed(seed)
    indptr, indices = graph.undirected
    c = float(local_clustering(indptr, indices).mean())
    l = mean_path_length(indptr, indices, path_samples, rng)
    cr, lr = [], []
    for _ in range(baseline_graphs):
        rp, ri = rewire(indptr, indices, rng, swaps_per_edge)
        cr.append(float(local_clustering(rp, ri).mean()))
        lr.append(mean_path_length(rp, ri, path_samples, rng))
    return SmallWorldStats(
        clustering=c,
        path_length=l,
        clustering_random=float(np.mean(cr)),
        path_length_random=float(np.mean(lr)),
        path_samples=path_samples,
        baseline_graphs=baseline_graphs,
        seed=seed if not isinstance(seed, np.random.Generator) else None,
    )
