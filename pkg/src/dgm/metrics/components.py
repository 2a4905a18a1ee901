"""Weakly and strongly connected components."""
from __future__ import annotations

import numpy as np

from ..exceptions import ModeMismatch
from ..graph import DependencyGraph
from ..validation import check_graph
from .results import ComponentLabeling, ConnectivitySummary

MODES = ("weak", "strong")


def _relabel_by_size(raw: np.ndarray, mode: str, node_ids: tuple) -> ComponentLabeling:
    """Renumber so id 0 is the largest component; ties go to the one holding the lower node index."""
    n = len(raw)
    if n == 0:
        return ComponentLabeling(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), mode, node_ids)
    uniq, first, inverse, sizes = np.unique(raw, return_index=True, return_inverse=True, return_counts=True)
    order = np.lexsort((first, -sizes))
    new_id = np.empty(len(uniq), dtype=np.int64)
    new_id[order] = np.arange(len(uniq))
    labels = new_id[inverse.reshape(-1)]
    return ComponentLabeling(labels, sizes[order].astype(np.int64), mode, node_ids)


def weak_roots(n: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Union-find by hooking and pointer jumping; returns the minimum index of each node's component."""
    parent = np.arange(n, dtype=np.int64)
    u, v = np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)
    while True:
        pu, pv = parent[u], parent[v]
        diff = pu != pv
        if not diff.any():
            return parent
        lo = np.minimum(pu[diff], pv[diff])
        hi = np.maximum(pu[diff], pv[diff])
        # every parent[] entry is a root here, so this hooks root onto smaller root
        np.minimum.at(parent, hi, lo)
        while True:
            pp = parent[parent]
            if np.array_equal(pp, parent):
                break
            parent = pp
        u, v = u[diff], v[diff]


def strong_labels(adj: list) -> np.ndarray:
    """Iterative Tarjan; returns a raw component number per node."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, 0)]
        while work:
            v, pos = work[-1]
            nbrs = adj[v]
            if pos < len(nbrs):
                w = nbrs[pos]
                work[-1] = (v, pos + 1)
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return np.asarray(comp, dtype=np.int64)


def connected_components(graph: DependencyGraph, mode: str = "weak") -> ComponentLabeling:
    """Label weak (direction ignored) or strong (mutual reachability) components."""
    check_graph(graph)
    mode = mode.lower()
    if mode == "weak":
        src, dst, _ = graph.edge_arrays
        raw = weak_roots(graph.n_nodes, src, dst)
    elif mode == "strong":
        raw = strong_labels(graph.adjacency_lists("out"))
    else:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return _relabel_by_size(raw, mode, graph.node_ids)


def summarize_connectivity(weak: ComponentLabeling, strong: ComponentLabeling) -> ConnectivitySummary:
    if weak.mode != "weak" or strong.mode != "strong":
        raise ModeMismatch(f"expected (weak, strong) labelings, got ({weak.mode}, {strong.mode})")
    if len(weak.labels) != len(strong.labels):
        raise ModeMismatch("labelings cover different node counts")
    n = len(weak.labels)
    coverage = round(100.0 * weak.largest / n, 2) if n else 0.0
    return ConnectivitySummary(
        total_components=weak.n_components,
        lcc_size=weak.largest,
        total_nodes=n,
        lcc_coverage_pct=coverage,
        scc_count=strong.n_components,
        largest_scc_size=strong.largest,
    )
