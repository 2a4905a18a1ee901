"""Seeded synthetic graphs used as ground truth for the metric kernels.

Every node is an artifact named ``synth:node:<i>`` and every edge is a
dependency edge; the graphs are flagged relaxed because the
artifact/release endpoint rules do not apply to them.

Families
--------
``ba`` / PreferentialAttachment(n, m)
    Start from a clique on nodes 0..m, then each new node i attaches to m
    distinct earlier nodes chosen proportionally to degree (repeated-endpoint
    urn).  Edges point from the newer node to the older one, so
    ``|E| = m (m + 1) / 2 + m (n - m - 1)``.
``er`` / UniformRandom(n, p)
    Every ordered pair (i, j), i != j, is an edge with probability p
    (directed), or every unordered pair with probability p stored in both
    directions (undirected orientation).
``ws`` / RewiredLattice(n, k, beta)
    Ring where node i links to its k/2 successors; each such link is rewired
    to a uniform random endpoint with probability beta, avoiding self-loops
    and duplicates (Watts-Strogatz).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameter, InvalidSpec
from .graph import DependencyGraph, EdgeKind, NodeKind
from .validation import check_int, check_real, rng_from_seed


class Family(str, enum.Enum):
    PREFERENTIAL_ATTACHMENT = "ba"
    UNIFORM_RANDOM = "er"
    REWIRED_LATTICE = "ws"


class Orientation(str, enum.Enum):
    DIRECTED = "directed"
    BIDIRECTED = "bidirected"


@dataclass(frozen=True)
class GeneratorSpec:
    family: Family
    n: int
    seed: object = 0
    m: int = 1
    p: float = 0.0
    k: int = 2
    beta: float = 0.0
    orientation: Orientation = Orientation.DIRECTED

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", Family(self.family))
            object.__setattr__(self, "orientation", Orientation(self.orientation))
            check_int(self.n, "n", minimum=2)
            if self.family is Family.PREFERENTIAL_ATTACHMENT:
                check_int(self.m, "m", minimum=1, maximum=self.n - 1)
            elif self.family is Family.UNIFORM_RANDOM:
                check_real(self.p, "p", 0.0, 1.0)
            else:
                check_int(self.k, "k", minimum=2, maximum=self.n - 1)
                if self.k % 2:
                    raise InvalidParameter(f"k must be even, got {self.k}")
                check_real(self.beta, "beta", 0.0, 1.0)
        except (InvalidParameter, ValueError) as exc:
            raise InvalidSpec(str(exc)) from None

    @classmethod
    def preferential_attachment(cls, n, m, seed=0, **kw):
        return cls(Family.PREFERENTIAL_ATTACHMENT, n=n, m=m, seed=seed, **kw)

    @classmethod
    def uniform_random(cls, n, p, seed=0, **kw):
        return cls(Family.UNIFORM_RANDOM, n=n, p=p, seed=seed, **kw)

    @classmethod
    def rewired_lattice(cls, n, k, beta, seed=0, **kw):
        return cls(Family.REWIRED_LATTICE, n=n, k=k, beta=beta, seed=seed, **kw)


def node_name(i: int) -> str:
    return f"synth:node:{i}"


def _preferential_attachment(n: int, m: int, rng) -> tuple[list, list]:
    src, dst = [], []
    urn: list = []
    for i in range(m + 1):
        for j in range(i):
            src.append(i)
            dst.append(j)
            urn += (i, j)
    # draw in bulk; reuse until exhausted
    pool = rng.random(4 * m * max(n, 1)).tolist()
    pos = 0
    for i in range(m + 1, n):
        targets: set = set()
        chosen = []
        while len(targets) < m:
            if pos == len(pool):
                pool = rng.random(4 * m * max(n, 1)).tolist()
                pos = 0
            t = urn[int(pool[pos] * len(urn))]
            pos += 1
            if t not in targets:
                targets.add(t)
                chosen.append(t)
        for t in chosen:
            src.append(i)
            dst.append(t)
            urn += (i, t)
    return src, dst


def _uniform_random(n: int, p: float, directed: bool, rng) -> tuple[list, list]:
    """Geometric skipping over the pair sequence (Batagelj-Brandes)."""
    if p <= 0:
        return [], []
    total = n * (n - 1) if directed else n * (n - 1) // 2
    if p >= 1:
        picks = np.arange(total, dtype=np.int64)
    else:
        # expected edges + slack; extend if the skips run short
        chunk = int(total * p + 10 * math.sqrt(total * p + 1) + 16)
        gaps = []
        pos = -1
        while True:
            g = rng.geometric(p, size=chunk)
            run = pos + np.cumsum(g)
            gaps.append(run[run < total])
            if run[-1] >= total:
                break
            pos = int(run[-1])
        picks = np.concatenate(gaps)
    if directed:
        i = picks // (n - 1)
        j = picks % (n - 1)
        j = j + (j >= i)
    else:
        # row-major unordered pair index -> (i, j), i < j
        i = (n - 2 - np.floor(np.sqrt(-8 * picks + 4 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(np.int64)
        j = picks + i + 1 - n * (n - 1) // 2 + (n - i) * ((n - i) - 1) // 2
    return i.tolist(), j.tolist()


def _rewired_lattice(n: int, k: int, beta: float, rng) -> tuple[list, list]:
    present: set = set()
    edges = []
    for i in range(n):
        for d in range(1, k // 2 + 1):
            j = (i + d) % n
            edges.append([i, j])
            present.add((min(i, j), max(i, j)))
    deg = [k] * n
    if beta > 0:
        for e in edges:
            if rng.random() >= beta:
                continue
            i, j = e
            # saturated node: nothing to rewire to
            if deg[i] >= n - 1:
                continue
            while True:
                t = int(rng.integers(n))
                key = (min(i, t), max(i, t))
                if t != i and key not in present:
                    break
            present.discard((min(i, j), max(i, j)))
            present.add(key)
            deg[j] -= 1
            deg[t] += 1
            e[1] = t
    return [e[0] for e in edges], [e[1] for e in edges]


def generate(spec: GeneratorSpec) -> DependencyGraph:
    """Build the graph described by ``spec``; identical seeds give identical graphs."""
    rng = rng_from_seed(spec.seed)
    n = spec.n
    if spec.family is Family.PREFERENTIAL_ATTACHMENT:
        src, dst = _preferential_attachment(n, spec.m, rng)
        undirected = True
    elif spec.family is Family.UNIFORM_RANDOM:
        directed = spec.orientation is Orientation.DIRECTED
        src, dst = _uniform_random(n, spec.p, directed, rng)
        undirected = not directed
    else:
        src, dst = _rewired_lattice(n, spec.k, spec.beta, rng)
        undirected = True
    src_a = np.asarray(src, dtype=np.int64)
    dst_a = np.asarray(dst, dtype=np.int64)
    if undirected and spec.orientation is Orientation.BIDIRECTED:
        src_a, dst_a = np.concatenate([src_a, dst_a]), np.concatenate([dst_a, src_a])
    return DependencyGraph._from_arrays(
        node_ids=tuple(node_name(i) for i in range(n)),
        kinds=np.full(n, NodeKind.ARTIFACT, dtype=np.uint8),
        timestamps=np.full(n, np.iinfo(np.int64).min, dtype=np.int64),
        metadata=(None,) * n,
        src=src_a,
        dst=dst_a,
        edge_kinds=np.full(len(src_a), EdgeKind.DEPENDENCY, dtype=np.uint8),
        relaxed=True,
    )


def pa_edge_count(n: int, m: int) -> int:
    return m * (m + 1) // 2 + m * (n - m - 1)
