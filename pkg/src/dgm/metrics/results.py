"""Result containers returned by the metric kernels."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class ScoreMap:
    """Per-node scores addressable by node id.

    ``values[i]`` is the score of ``node_ids[i]``.
    """

    name: str
    values: np.ndarray
    node_ids: tuple
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != len(self.node_ids):
            raise ValueError("score vector length does not match node count")
        self._index = None

    def __len__(self):
        return len(self.values)

    def __getitem__(self, node_id: str) -> float:
        if self._index is None:
            self._index = {n: i for i, n in enumerate(self.node_ids)}
        return float(self.values[self._index[node_id]])

    def as_dict(self) -> dict:
        return dict(zip(self.node_ids, self.values.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_id", "score"])
            for nid, v in zip(self.node_ids, self.values.tolist()):
                w.writerow([nid, repr(v)])


@dataclass
class DegreeHistogram:
    """Map degree -> number of nodes having it."""

    counts: dict
    direction: str
    kind: Optional[str] = None

    def __post_init__(self):
        self.counts = {int(k): int(v) for k, v in sorted(self.counts.items())}

    def __eq__(self, other):
        if isinstance(other, DegreeHistogram):
            return (self.counts, self.direction, self.kind) == (
                other.counts, other.direction, other.kind)
        if isinstance(other, dict):
            return self.counts == other
        return NotImplemented

    @property
    def n_nodes(self) -> int:
        return sum(self.counts.values())

    def total(self) -> int:
        """Sum of degree * count, i.e. the edge endpoints covered."""
        return sum(k * v for k, v in self.counts.items())

    def to_samples(self) -> np.ndarray:
        """Expand back into one degree value per node."""
        if not self.counts:
            return np.empty(0, dtype=np.int64)
        keys = np.fromiter(self.counts.keys(), dtype=np.int64)
        reps = np.fromiter(self.counts.values(), dtype=np.int64)
        return np.repeat(keys, reps)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["degree", "count"])
            for k, v in self.counts.items():
                w.writerow([k, v])


@dataclass
class ComponentLabeling:
    """Node -> component id; id 0 is the largest component."""

    labels: np.ndarray
    sizes: np.ndarray
    mode: str
    node_ids: tuple = ()

    @property
    def n_components(self) -> int:
        return len(self.sizes)

    @property
    def largest(self) -> int:
        return int(self.sizes[0]) if len(self.sizes) else 0

    def partition(self) -> set:
        """Components as a set of frozensets of node indices (for comparisons)."""
        groups: dict = {}
        for i, c in enumerate(self.labels.tolist()):
            groups.setdefault(c, []).append(i)
        return {frozenset(g) for g in groups.values()}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_id", "component_id"])
            for nid, c in zip(self.node_ids, self.labels.tolist()):
                w.writerow([nid, c])


@dataclass
class ConnectivitySummary:
    total_components: int
    lcc_size: int
    total_nodes: int
    lcc_coverage_pct: float
    scc_count: int
    largest_scc_size: int

    @property
    def remaining_components(self) -> int:
        return max(self.total_components - 1, 0)

    @property
    def remaining_pct(self) -> float:
        if not self.total_nodes:
            return 0.0
        return round(100.0 - self.lcc_coverage_pct, 2)

    def to_dict(self) -> dict:
        return {
            "total_components": self.total_components,
            "lcc_size": self.lcc_size,
            "total_nodes": self.total_nodes,
            "lcc_coverage_pct": self.lcc_coverage_pct,
            "remaining_components": self.remaining_components,
            "remaining_pct": self.remaining_pct,
            "scc_count": self.scc_count,
            "largest_scc_size": self.largest_scc_size,
        }

    def rows(self) -> list:
        """Label/value rows in the layout of a connectivity summary table."""
        return [
            ("Total number of connected components", f"{self.total_components:,}"),
            ("Size of largest connected component (LCC)", f"{self.lcc_size:,}"),
            ("Total number of nodes in the graph", f"{self.total_nodes:,}"),
            ("LCC coverage", f"{self.lcc_coverage_pct:.2f} %"),
            (f"Remaining small components ({self.remaining_components} in total)",
             f"{self.remaining_pct:.2f} %"),
            ("Number of strongly connected components (SCCs)", f"{self.scc_count:,}"),
            ("Size of largest SCC", f"{self.largest_scc_size:,}"),
        ]


@dataclass
class SmallWorldStats:
    clustering: float
    path_length: float
    clustering_random: float
    path_length_random: float
    path_samples: int
    baseline_graphs: int
    seed: object

    @property
    def sigma(self) -> float:
        if self.clustering_random == 0 or self.path_length == 0:
            return math.inf if self.clustering > 0 else math.nan
        return (self.clustering / self.clustering_random) / (
            self.path_length / self.path_length_random)

    def to_dict(self) -> dict:
        return {
            "clustering": self.clustering,
            "path_length": self.path_length,
            "clustering_random": self.clustering_random,
            "path_length_random": self.path_length_random,
            "sigma": self.sigma,
            "path_samples": self.path_samples,
            "baseline_graphs": self.baseline_graphs,
            "seed": self.seed,
        }
