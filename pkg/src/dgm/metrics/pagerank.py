from __future__ import annotations

import logging
import warnings

import numpy as np
from scipy import sparse

from ..exceptions import EmptyGraph, NotConverged
from ..graph import DependencyGraph
from ..validation import check_graph, check_int, check_real
from .results import ScoreMap

log = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


class ConvergenceWarning(UserWarning):
    pass


def pagerank(
    graph: DependencyGraph,
    alpha: float = DEFAULT_ALPHA,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    strict: bool = False,
) -> ScoreMap:
    """Power-iteration PageRank on the directed graph.

    Each step computes

        PR(v) = (1 - alpha)/|V| + alpha * sum_{u -> v} PR(u)/outdeg(u)
                + alpha * (mass held by nodes with no out-edges)/|V|

    so dangling nodes spread their score uniformly and the scores keep
    summing to one.  Iteration stops once the L1 change drops below
    ``tol``.  Hitting ``max_iter`` first sets ``diagnostics["converged"]``
    to False and emits a :class:`ConvergenceWarning` (or raises
    :class:`NotConverged` when ``strict``).
    """
    check_graph(graph)
    alpha = check_real(alpha, "alpha", 0.0, 1.0, low_open=True, high_open=True)
    tol = check_real(tol, "tol", 0.0, low_open=True)
    max_iter = check_int(max_iter, "max_iter", minimum=1)
    n = graph.n_nodes
    if n == 0:
        raise EmptyGraph("pagerank needs at least one node")

    # row v of the in-adjacency lists predecessors of v
    m = sparse.csr_matrix(
        (np.ones(graph.n_edges), graph.in_indices, graph.in_indptr), shape=(n, n)
    )
    out_deg = graph.out_degree.astype(float)
    dangling = out_deg == 0
    inv_out = np.zeros(n)
    inv_out[~dangling] = 1.0 / out_deg[~dangling]

    x = np.full(n, 1.0 / n)
    converged = False
    err = float("inf")
    it = 0
    for it in range(1, max_iter + 1):
        leak = alpha * x[dangling].sum() + (1.0 - alpha)
        y = alpha * (m @ (x * inv_out)) + leak / n
        err = float(np.abs(y - x).sum())
        x = y
        if err < tol:
            converged = True
            break

    diagnostics = {"iterations": it, "converged": converged, "l1_change": err}
    if not converged:
        msg = f"pagerank did not converge in {max_iter} iterations (L1 change {err:.3e})"
        if strict:
            raise NotConverged(msg)
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
    return ScoreMap(
        "pagerank",
        x,
        graph.node_ids,
        params={"alpha": alpha, "tol": tol, "max_iter": max_iter},
        diagnostics=diagnostics,
    )
