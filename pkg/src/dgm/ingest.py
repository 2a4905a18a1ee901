"""Flat-file loading, top-K seed selection and BFS-expansion sampling.

The CSV layout::

    nodes.csv   id,kind,timestamp           kind in {artifact, release}
    edges.csv   src,dst,kind                kind in {dependency, versioning}

Rows that cannot be parsed (wrong field count, unknown kind, bad timestamp,
invalid coordinate) are *malformed*; more than 1% malformed rows in a file
aborts the load with :class:`~dgm.exceptions.FormatError`.  Rows that parse
but cannot be added (edge to an unknown node, self-loop, endpoint-kind
violation, conflicting duplicate node) are *skipped* and only counted.
"""
from __future__ import annotations

import csv
import enum
import logging
from collections import Counter
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, Sequence, Union

import numpy as np

from .exceptions import DGMError, FormatError, UnknownSeed
from .graph import DependencyGraph, EdgeKind, GraphBuilder, NodeKind, validate_node_id
from .validation import check_graph, check_int

log = logging.getLogger(__name__)

NODE_HEADER = ("id", "kind", "timestamp")
EDGE_HEADER = ("src", "dst", "kind")
MAX_MALFORMED_FRACTION = 0.01

Path = Union[str, PathLike]


@dataclass
class LoadReport:
    node_rows: int = 0
    edge_rows: int = 0
    malformed_rows: int = 0
    skipped_rows: int = 0
    reasons: Counter = field(default_factory=Counter)

    def to_dict(self) -> dict:
        return {
            "node_rows": self.node_rows,
            "edge_rows": self.edge_rows,
            "malformed_rows": self.malformed_rows,
            "skipped_rows": self.skipped_rows,
            "reasons": dict(sorted(self.reasons.items())),
        }


def _open(path: Path):
    try:
        return open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _check_header(row, expected, path):
    got = tuple(c.strip().lower() for c in (row or ()))
    if got[: len(expected)] != expected:
        raise FormatError(f"{path}: expected header {','.join(expected)}, got {','.join(got)}")


def _check_malformed(bad: int, total: int, path) -> None:
    if total and bad / total > MAX_MALFORMED_FRACTION:
        raise FormatError(
            f"{path}: {bad} of {total} rows malformed (limit {MAX_MALFORMED_FRACTION:.0%})"
        )


def load_csv_with_report(
    nodes_path: Path, edges_path: Path, relaxed: bool = False
) -> tuple[DependencyGraph, LoadReport]:
    """Load a graph from the node and edge CSVs and report what was dropped.

    ``relaxed`` accepts graphs that ignore the artifact/release endpoint
    rules, e.g. those written by ``dgm synth``.
    """
    builder = GraphBuilder(relaxed=relaxed)
    report = LoadReport()

    with _open(nodes_path) as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), NODE_HEADER, nodes_path)
        bad = 0
        for row in reader:
            if not row:
                continue
            report.node_rows += 1
            try:
                if len(row) < 2 or len(row) > 4:
                    raise ValueError("field count")
                node_id = validate_node_id(row[0].strip())
                kind = NodeKind.parse(row[1])
                ts = row[2].strip() if len(row) > 2 else ""
                timestamp = int(ts) if ts else None
                metadata = row[3] if len(row) > 3 and row[3] != "" else None
            except (ValueError, DGMError):
                bad += 1
                report.reasons["malformed_node"] += 1
                continue
            try:
                builder.add_node(node_id, kind, timestamp, metadata)
            except DGMError:
                report.skipped_rows += 1
                report.reasons["node_kind_conflict"] += 1
        report.malformed_rows += bad
        _check_malformed(bad, report.node_rows, nodes_path)

    with _open(edges_path) as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), EDGE_HEADER, edges_path)
        bad = 0
        for row in reader:
            if not row:
                continue
            report.edge_rows += 1
            try:
                if len(row) != 3:
                    raise ValueError("field count")
                src, dst = row[0].strip(), row[1].strip()
                kind = EdgeKind.parse(row[2])
            except ValueError:
                bad += 1
                report.reasons["malformed_edge"] += 1
                continue
            try:
                builder.add_edge(src, dst, kind)
            except DGMError as exc:
                report.skipped_rows += 1
                report.reasons[_reason(exc)] += 1
        report.malformed_rows += bad
        _check_malformed(bad, report.edge_rows, edges_path)

    if report.skipped_rows or report.malformed_rows:
        log.info("load: %s", report.to_dict())
    return builder.finalize(), report


def _reason(exc: Exception) -> str:
    name = type(exc).__name__
    return {
        "UnknownNode": "unknown_node",
        "SelfLoop": "self_loop",
        "EndpointKindMismatch": "endpoint_kind_mismatch",
    }.get(name, name)


def load_csv(nodes_path: Path, edges_path: Path, relaxed: bool = False) -> DependencyGraph:
    return load_csv_with_report(nodes_path, edges_path, relaxed=relaxed)[0]


def write_nodes_csv(graph: DependencyGraph, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        has_meta = any(m is not None for m in graph.metadata)
        w.writerow(NODE_HEADER + (("metadata",) if has_meta else ()))
        for i, nid in enumerate(graph.node_ids):
            ts = graph.timestamp(nid)
            row = [nid, NodeKind(int(graph.kinds[i])).label, "" if ts is None else ts]
            if has_meta:
                row.append(graph.metadata[i] or "")
            w.writerow(row)


def write_edges_csv(graph: DependencyGraph, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_HEADER)
        for u, v, k in graph.edges():
            w.writerow([u, v, k.label])


def write_csv(graph: DependencyGraph, nodes_path: Path, edges_path: Path) -> None:
    """Write ``graph`` in the loader's CSV layout (insertion order, CSR edge order)."""
    write_nodes_csv(graph, nodes_path)
    write_edges_csv(graph, edges_path)


# seeds ---------------------------------------------------------------


class SeedSet(Sequence):
    """Artifacts ordered by incoming dependency count, largest first."""

    def __init__(self, entries: Iterable[tuple[str, int]]):
        self.entries = [(str(n), int(c)) for n, c in entries]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return SeedSet(self.entries[i])
        return self.entries[i]

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if isinstance(other, SeedSet):
            return self.entries == other.entries
        return self.entries == list(other)

    def __repr__(self):
        head = ", ".join(f"{n}={c}" for n, c in self.entries[:3])
        more = ", ..." if len(self) > 3 else ""
        return f"SeedSet([{head}{more}])"

    @property
    def ids(self) -> list[str]:
        return [n for n, _ in self.entries]


def incoming_dependency_counts(graph: DependencyGraph) -> np.ndarray:
    src, dst, kind = graph.edge_arrays
    return np.bincount(dst[kind == EdgeKind.DEPENDENCY], minlength=graph.n_nodes)


def select_top_seeds(graph: DependencyGraph, k: int) -> SeedSet:
    """The ``k`` artifacts with the most incoming dependency edges.

    Ties are broken by ascending node id so the result is reproducible.
    """
    check_graph(graph)
    k = check_int(k, "k", minimum=1)
    counts = incoming_dependency_counts(graph)
    artifacts = np.flatnonzero(graph.kinds == NodeKind.ARTIFACT)
    ids = graph.node_ids
    ranked = sorted(artifacts.tolist(), key=lambda i: (-int(counts[i]), ids[i]))[:k]
    return SeedSet((ids[i], int(counts[i])) for i in ranked)


# sampling ------------------------------------------------------------


class Direction(str, enum.Enum):
    FORWARD = "forward"
    REVERSE = "reverse"
    BOTH = "both"


@dataclass(frozen=True)
class SampleSpec:
    k: int = 5000
    depth: int = 2
    direction: Direction = Direction.BOTH

    def __post_init__(self):
        check_int(self.k, "k", minimum=1)
        check_int(self.depth, "depth", minimum=1)
        object.__setattr__(self, "direction", Direction(self.direction))


def _gather(indptr: np.ndarray, indices: np.ndarray, frontier: np.ndarray) -> np.ndarray:
    starts = indptr[frontier]
    lens = indptr[frontier + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(total)
    return indices[offsets]


def reachable_within(
    graph: DependencyGraph, sources: Sequence[int], depth: int, direction=Direction.BOTH
) -> np.ndarray:
    """Boolean mask of nodes within ``depth`` hops of any source.

    Multi-source BFS with one shared visited mask, so a node reached from
    several seeds is expanded once, at its smallest distance.
    """
    direction = Direction(direction)
    visited = np.zeros(graph.n_nodes, dtype=bool)
    frontier = np.unique(np.asarray(sources, dtype=np.int64))
    visited[frontier] = True
    for _ in range(depth):
        if not len(frontier):
            break
        parts = []
        if direction in (Direction.FORWARD, Direction.BOTH):
            parts.append(_gather(graph.out_indptr, graph.out_indices, frontier))
        if direction in (Direction.REVERSE, Direction.BOTH):
            parts.append(_gather(graph.in_indptr, graph.in_indices, frontier))
        nxt = np.unique(np.concatenate(parts))
        nxt = nxt[~visited[nxt]]
        visited[nxt] = True
        frontier = nxt
    return visited


def bfs_sample(graph: DependencyGraph, seeds, spec: SampleSpec = SampleSpec()) -> DependencyGraph:
    """Induced subgraph on every node within ``spec.depth`` hops of a seed.

    ``seeds`` may be a :class:`SeedSet` or any iterable of node ids.
    ``spec.k`` is ignored here; it only matters to :func:`select_top_seeds`.
    """
    check_graph(graph)
    ids = seeds.ids if isinstance(seeds, SeedSet) else list(seeds)
    index = graph.index_map
    missing = [s for s in ids if s not in index]
    if missing:
        raise UnknownSeed(f"seed(s) not in graph: {', '.join(map(repr, missing[:5]))}")
    mask = reachable_within(graph, [index[s] for s in ids], spec.depth, spec.direction)
    return graph.induced(mask)


def sample_manifest(
    sample: DependencyGraph, seeds: Sequence, spec: SampleSpec, skipped_rows: int = 0
) -> dict:
    return {
        "seed_count": len(seeds),
        "depth": spec.depth,
        "direction": spec.direction.value,
        "node_count": sample.n_nodes,
        "edge_count": sample.n_edges,
        "skipped_rows": int(skipped_rows),
    }
