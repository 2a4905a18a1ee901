"""Node-removal experiments: random failures versus targeted attacks.

A policy ranks all nodes once on the intact graph.  Nodes are removed in
batches of ``ceil(step * |V|)`` following that ranking and after every batch
the size of the largest weakly connected component of the survivors is
recorded as a fraction of the original node count.

The curve is computed incrementally: survivors are re-inserted in reverse
removal order into a union-find structure, so one pass yields every point.
:func:`lcc_after_removal` recomputes a single point from scratch and serves
as the cross-check.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import EmptyGraph, InvalidFraction
from .graph import DependencyGraph, EdgeKind, NodeKind
from .metrics.betweenness import betweenness_exact, betweenness_sampled
from .metrics.components import connected_components
from .metrics.pagerank import pagerank
from .validation import check_graph, check_int, rng_from_seed


class PolicyKind(str, enum.Enum):
    RANDOM = "random"
    DEGREE = "degree"
    PAGERANK = "pagerank"
    BETWEENNESS = "betweenness"


@dataclass(frozen=True)
class RemovalPolicy:
    """How nodes are ordered for removal.

    Targeted policies sort by the named score, highest first, ties by node
    id.  ``pivots`` switches targeted-betweenness to the sampled estimator
    (seeded with ``seed``, default 0).
    """

    kind: PolicyKind
    seed: object = None
    pivots: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))

    @classmethod
    def random(cls, seed=0):
        return cls(PolicyKind.RANDOM, seed=seed)

    @classmethod
    def targeted_degree(cls):
        return cls(PolicyKind.DEGREE)

    @classmethod
    def targeted_pagerank(cls):
        return cls(PolicyKind.PAGERANK)

    @classmethod
    def targeted_betweenness(cls, pivots=None, seed=0):
        return cls(PolicyKind.BETWEENNESS, seed=seed, pivots=pivots)

    @property
    def name(self) -> str:
        return self.kind.value if self.kind is PolicyKind.RANDOM else f"targeted-{self.kind.value}"

    @property
    def deterministic(self) -> bool:
        return self.kind is not PolicyKind.RANDOM

    def to_dict(self) -> dict:
        out = {"policy": self.name}
        if self.seed is not None:
            out["seed"] = self.seed
        if self.pivots is not None:
            out["pivots"] = self.pivots
        return out


def _ranked(scores: np.ndarray, node_ids: Sequence[str]) -> np.ndarray:
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], node_ids[i]))
    return np.asarray(order, dtype=np.int64)


def removal_order(graph: DependencyGraph, policy: RemovalPolicy, rng=None) -> np.ndarray:
    """Node indices in the order the policy removes them."""
    n = graph.n_nodes
    kind = policy.kind
    if kind is PolicyKind.RANDOM:
        rng = rng if rng is not None else rng_from_seed(policy.seed if policy.seed is not None else 0)
        return rng.permutation(n).astype(np.int64)
    if kind is PolicyKind.DEGREE:
        scores = (graph.in_degree + graph.out_degree).astype(float)
    elif kind is PolicyKind.PAGERANK:
        scores = pagerank(graph).values
    elif policy.pivots is None or policy.pivots >= n:
        scores = betweenness_exact(graph).values
    else:
        seed = policy.seed if policy.seed is not None else 0
        scores = betweenness_sampled(graph, policy.pivots, seed).values
    return _ranked(scores, graph.node_ids)


@dataclass
class ResilienceCurve:
    fraction_removed: np.ndarray
    lcc_fraction: np.ndarray
    policy: dict
    step: float
    max_fraction: float
    batch_size: int
    removed_counts: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.fraction_removed)

    @property
    def auc(self) -> float:
        if len(self.fraction_removed) < 2:
            return 0.0
        return float(np.trapezoid(self.lcc_fraction, self.fraction_removed))

    def points(self) -> list:
        return list(zip(self.fraction_removed.tolist(), self.lcc_fraction.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fraction_removed", "lcc_fraction"])
            for f, l in self.points():
                w.writerow([repr(f), repr(l)])


def batch_size(n: int, step: float) -> int:
    # guard against 1/11 * 11 == 1.0000000000000002
    return max(1, math.ceil(step * n - 1e-9))


def _check_fractions(max_fraction: float, step: float) -> None:
    if not (0.0 <= max_fraction <= 1.0):
        raise InvalidFraction(f"max_fraction must lie in [0, 1], got {max_fraction}")
    if not (0.0 < step <= 1.0):
        raise InvalidFraction(f"step must lie in (0, 1], got {step}")
    if max_fraction > 0 and step > max_fraction:
        raise InvalidFraction(f"step {step} exceeds max_fraction {max_fraction}")


def _cascade(graph: DependencyGraph, order: np.ndarray, batch: int, limit: int) -> tuple:
    """Expand ranked batches with the releases of every removed artifact.

    Returns the expanded removal sequence and the cumulative removed count
    after each batch.
    """
    removed = np.zeros(graph.n_nodes, dtype=bool)
    seq: list = []
    marks: list = []
    for start in range(0, limit, batch):
        for v in order[start:min(start + batch, limit)].tolist():
            if removed[v]:
                continue
            removed[v] = True
            seq.append(v)
            if graph.kinds[v] == NodeKind.ARTIFACT:
                lo, hi = graph.out_indptr[v], graph.out_indptr[v + 1]
                for w, k in zip(graph.out_indices[lo:hi].tolist(), graph.out_kinds[lo:hi].tolist()):
                    if k == EdgeKind.VERSIONING and not removed[w]:
                        removed[w] = True
                        seq.append(w)
        marks.append(len(seq))
    rest = np.flatnonzero(~removed)
    return np.concatenate([np.asarray(seq, dtype=np.int64), rest]), marks


def lcc_sizes_after_prefixes(graph: DependencyGraph, order: np.ndarray, prefixes: Sequence[int]) -> dict:
    """Weak-LCC size of the graph minus ``order[:r]`` for every r in ``prefixes``.

    ``order`` must be a permutation of all node indices.
    """
    n = graph.n_nodes
    adj = graph.adjacency_lists("undirected")
    parent = list(range(n))
    size = [1] * n
    present = [False] * n
    wanted = set(int(r) for r in prefixes)
    out = {}
    largest = 0
    if n in wanted:
        out[n] = 0

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    seq = order.tolist()
    for r in range(n - 1, -1, -1):
        v = seq[r]
        present[v] = True
        rv = find(v)
        for w in adj[v]:
            if not present[w]:
                continue
            rw = find(w)
            if rw == rv:
                continue
            if size[rv] < size[rw]:
                rv, rw = rw, rv
            parent[rw] = rv
            size[rv] += size[rw]
        if size[rv] > largest:
            largest = size[rv]
        if r in wanted:
            out[r] = largest
    return out


def lcc_after_removal(graph: DependencyGraph, removed) -> int:
    """Weak-LCC size of the survivors, recomputed from scratch."""
    mask = np.ones(graph.n_nodes, dtype=bool)
    mask[np.asarray(list(removed), dtype=np.int64)] = False
    sub = graph.induced(mask)
    return connected_components(sub, "weak").largest if sub.n_nodes else 0


def removal_experiment(
    graph: DependencyGraph,
    policy: RemovalPolicy,
    max_fraction: float = 1.0,
    step: float = 0.01,
    cascade: bool = False,
    order: Optional[np.ndarray] = None,
) -> ResilienceCurve:
    """LCC fraction after each removal batch, starting from the intact graph.

    With ``cascade`` the releases of a removed artifact go with it.
    ``order`` supplies a precomputed ranking (node indices).
    """
    check_graph(graph)
    _check_fractions(float(max_fraction), float(step))
    n = graph.n_nodes
    if n == 0:
        raise EmptyGraph("cannot run a removal experiment on an empty graph")
    batch = batch_size(n, step)
    limit = min(n, math.floor(max_fraction * n + 1e-9))
    if order is None:
        order = removal_order(graph, policy)
    order = np.asarray(order, dtype=np.int64)
    if cascade:
        order, marks = _cascade(graph, order, batch, limit)
    else:
        marks = list(range(batch, limit, batch)) + ([limit] if limit > 0 else [])
    # drop batches that removed nothing new (possible only with cascade)
    counts = [0]
    for r in marks:
        if r > counts[-1]:
            counts.append(r)
    sizes = lcc_sizes_after_prefixes(graph, order, counts)
    fr = np.array(counts, dtype=float) / n
    lcc = np.array([sizes[r] for r in counts], dtype=float) / n
    return ResilienceCurve(
        fraction_removed=fr,
        lcc_fraction=lcc,
        policy=policy.to_dict(),
        step=float(step),
        max_fraction=float(max_fraction),
        batch_size=batch,
        removed_counts=np.array(counts, dtype=np.int64),
    )


def grid_mean(stack: np.ndarray) -> np.ndarray:
    # identical rows (deterministic policies) must average to themselves exactly
    same = np.all(stack == stack[0], axis=0)
    return np.where(same, stack[0], stack.mean(axis=0))


def grid_std(stack: np.ndarray) -> np.ndarray:
    same = np.all(stack == stack[0], axis=0)
    return np.where(same, 0.0, stack.std(axis=0))


@dataclass
class PolicySummary:
    policy: dict
    fraction_removed: np.ndarray
    mean_lcc: np.ndarray
    std_lcc: np.ndarray
    aucs: list

    @property
    def mean_auc(self) -> float:
        return float(np.mean(self.aucs))

    def to_dict(self) -> dict:
        return {
            **self.policy,
            "trials": len(self.aucs),
            "mean_auc": self.mean_auc,
            "std_auc": float(grid_std(np.asarray(self.aucs, dtype=float)[:, None])[0]),
            "aucs": [float(a) for a in self.aucs],
            "fraction_removed": self.fraction_removed.tolist(),
            "mean_lcc_fraction": self.mean_lcc.tolist(),
            "std_lcc_fraction": self.std_lcc.tolist(),
        }


def compare_policies(
    graph: DependencyGraph,
    policies: Sequence[RemovalPolicy],
    max_fraction: float = 1.0,
    step: float = 0.01,
    trials: int = 10,
    seed=0,
    cascade: bool = False,
) -> list:
    """Mean curve and AUC per policy.

    Random policies draw ``trials`` independent orderings from a seed
    sequence rooted at the policy's own seed (or ``seed``).  Targeted
    policies are deterministic, so their ranking is computed once and every
    trial repeats the same curve.
    """
    if not policies:
        raise ValueError("need at least one policy")
    trials = check_int(trials, "trials", minimum=1)
    out = []
    for policy in policies:
        if policy.deterministic:
            curve = removal_experiment(graph, policy, max_fraction, step, cascade)
            curves = [curve] * trials
        else:
            base = policy.seed if policy.seed is not None else seed
            children = np.random.SeedSequence(base).spawn(trials)
            curves = [
                removal_experiment(
                    graph, policy, max_fraction, step, cascade,
                    order=removal_order(graph, policy, np.random.default_rng(child)),
                )
                for child in children
            ]
        grid = curves[0].fraction_removed
        # cascading removal can give trials different grids
        stack = np.vstack([
            c.lcc_fraction if np.array_equal(c.fraction_removed, grid)
            else np.interp(grid, c.fraction_removed, c.lcc_fraction)
            for c in curves
        ])
        out.append(PolicySummary(
            policy={**policy.to_dict(), "seed": policy.seed if policy.seed is not None else seed}
            if not policy.deterministic else policy.to_dict(),
            fraction_removed=grid,
            mean_lcc=grid_mean(stack),
            std_lcc=grid_std(stack),
            aucs=[c.auc for c in curves],
        ))
    return out
