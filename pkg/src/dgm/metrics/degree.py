from __future__ import annotations

from typing import Optional, Union

import numpy as np

from ..graph import DependencyGraph, NodeKind
from ..validation import check_graph
from .results import DegreeHistogram

DIRECTIONS = ("in", "out", "total")


def degree_vector(graph: DependencyGraph, direction: str = "total") -> np.ndarray:
    direction = direction.lower()
    if direction == "in":
        return np.asarray(graph.in_degree)
    if direction == "out":
        return np.asarray(graph.out_degree)
    if direction == "total":
        return graph.in_degree + graph.out_degree
    raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def degree_distribution(
    graph: DependencyGraph,
    direction: str = "total",
    kind: Optional[Union[NodeKind, str]] = None,
) -> DegreeHistogram:
    """Exact histogram of in-, out- or total degree, optionally for one node kind."""
    check_graph(graph)
    deg = degree_vector(graph, direction)
    label = None
    if kind is not None:
        kind = NodeKind.parse(kind)
        deg = deg[graph.kinds == kind]
        label = kind.label
    values, counts = np.unique(deg, return_counts=True)
    return DegreeHistogram(dict(zip(values.tolist(), counts.tolist())), direction.lower(), label)
