"""Brute-force reference implementations used only by the tests."""
from collections import deque

import numpy as np

from dgm import GraphBuilder


def random_digraph(n, n_edges, seed, prefix="t"):
    """Relaxed digraph on ``n`` nodes with up to ``n_edges`` random distinct edges."""
    rng = np.random.default_rng(seed)
    b = GraphBuilder(relaxed=True)
    for i in range(n):
        b.add_node(f"{prefix}:{i}", "artifact")
    for _ in range(n_edges):
        u, v = rng.integers(n, size=2)
        if u != v:
            b.add_edge(f"{prefix}:{u}", f"{prefix}:{v}", "dependency")
    return b.finalize()


def _adjacency(graph):
    return [graph.successors(i).tolist() for i in range(graph.n_nodes)]


def path_counts(graph):
    """Distance and shortest-path-count matrices from one BFS per source."""
    n = graph.n_nodes
    adj = _adjacency(graph)
    dist = np.full((n, n), -1, dtype=np.int64)
    sigma = np.zeros((n, n))
    for s in range(n):
        dist[s, s] = 0
        sigma[s, s] = 1.0
        q = deque([s])
        while q:
            v = q.popleft()
            for w in adj[v]:
                if dist[s, w] < 0:
                    dist[s, w] = dist[s, v] + 1
                    q.append(w)
                if dist[s, w] == dist[s, v] + 1:
                    sigma[s, w] += sigma[s, v]
    return dist, sigma


def betweenness_bruteforce(graph):
    """Sum over ordered pairs s != v != t of sigma_st(v) / sigma_st.

    sigma_st(v) = sigma_sv * sigma_vt whenever d(s,v) + d(v,t) = d(s,t).
    """
    n = graph.n_nodes
    dist, sigma = path_counts(graph)
    bc = np.zeros(n)
    reach = dist >= 0
    safe = np.where(sigma > 0, sigma, 1.0)
    off = ~np.eye(n, dtype=bool)
    for v in range(n):
        on_path = (
            reach[:, [v]] & reach[[v], :] & reach & off
            & (dist[:, [v]] + dist[[v], :] == dist)
        )
        on_path[v, :] = False
        on_path[:, v] = False
        bc[v] = (np.outer(sigma[:, v], sigma[v, :]) / safe)[on_path].sum()
    return bc


def pagerank_dense(graph, alpha=0.85, iters=100_000, tol=1e-15):
    """Dense power iteration, dangling mass spread uniformly."""
    n = graph.n_nodes
    M = np.zeros((n, n))
    out = graph.out_degree
    for u in range(n):
        for v in graph.successors(u):
            M[v, u] += 1.0 / out[u]
    dangling = out == 0
    x = np.full(n, 1.0 / n)
    for _ in range(iters):
        new = alpha * (M @ x) + (alpha * x[dangling].sum() + 1.0 - alpha) / n
        if np.abs(new - x).sum() < tol:
            return new
        x = new
    return x


def reachability(graph, undirected=False):
    """Boolean transitive-reflexive closure (Warshall)."""
    n = graph.n_nodes
    R = np.eye(n, dtype=bool)
    for u in range(n):
        for v in graph.successors(u):
            R[u, v] = True
            if undirected:
                R[v, u] = True
    for k in range(n):
        R |= R[:, [k]] & R[[k], :]
    return R


def partition_from_closure(R, mutual=True):
    n = len(R)
    rel = R & R.T if mutual else R
    seen = np.zeros(n, dtype=bool)
    parts = set()
    for i in range(n):
        if not seen[i]:
            members = np.flatnonzero(rel[i])
            seen[members] = True
            parts.add(frozenset(members.tolist()))
    return parts
