"""Typed, immutable directed dependency graph.

Nodes are Maven-style coordinates: artifacts are ``group:artifact`` and
releases are ``group:artifact:version``.  Two edge kinds exist:

* versioning edges run artifact -> release (release lineage)
* dependency edges run release -> artifact (what a release depends on)

Graphs are assembled with :class:`GraphBuilder` and frozen by
:meth:`GraphBuilder.finalize` into a :class:`DependencyGraph` whose forward
and reverse adjacency are stored as CSR arrays.  The finalized graph never
changes, so it can be shared freely between threads.
"""
from __future__ import annotations

import enum
import io
import struct
from functools import cached_property
from os import PathLike
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .exceptions import (
    EndpointKindMismatch,
    GraphFinalized,
    InvalidNodeId,
    KindConflict,
    SelfLoop,
    SnapshotError,
    UnknownNode,
)

__all__ = [
    "NodeKind",
    "EdgeKind",
    "GraphBuilder",
    "DependencyGraph",
    "degree",
    "validate_node_id",
]


class NodeKind(enum.IntEnum):
    ARTIFACT = 0
    RELEASE = 1

    @classmethod
    def parse(cls, value: Union[str, int, "NodeKind"]) -> "NodeKind":
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown node kind {value!r}") from None
        return cls(value)

    @property
    def label(self) -> str:
        return self.name.lower()


class EdgeKind(enum.IntEnum):
    VERSIONING = 0
    DEPENDENCY = 1

    @classmethod
    def parse(cls, value: Union[str, int, "EdgeKind"]) -> "EdgeKind":
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown edge kind {value!r}") from None
        return cls(value)

    @property
    def label(self) -> str:
        return self.name.lower()


# (src kind, dst kind) allowed for each edge kind
_ENDPOINT_RULES = {
    EdgeKind.VERSIONING: (NodeKind.ARTIFACT, NodeKind.RELEASE),
    EdgeKind.DEPENDENCY: (NodeKind.RELEASE, NodeKind.ARTIFACT),
}

_NO_TIMESTAMP = np.iinfo(np.int64).min


def validate_node_id(node_id: str) -> str:
    if not isinstance(node_id, str) or not node_id or ":" not in node_id:
        raise InvalidNodeId(
            f"node id must be a non-empty coordinate containing ':', got {node_id!r}"
        )
    return node_id


def _release_artifact(release_id: str) -> str:
    """``group:artifact`` part of a ``group:artifact:version`` id."""
    return release_id.rsplit(":", 1)[0]


class GraphBuilder:
    """Single-writer accumulator for nodes and edges.

    Parameters
    ----------
    relaxed : bool, default=False
        Skip the artifact/release endpoint rules.  Used for synthetic
        oracle graphs where every node is an artifact and every edge a
        dependency.
    """

    def __init__(self, relaxed: bool = False):
        self.relaxed = relaxed
        self._index: dict[str, int] = {}
        self._ids: list[str] = []
        self._kinds: list[int] = []
        self._timestamps: list[Optional[int]] = []
        self._metadata: list[Optional[str]] = []
        self._edges: dict[tuple[int, int, int], int] = {}
        self._finalized = False

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def _check_open(self):
        if self._finalized:
            raise GraphFinalized("builder already finalized")

    def add_node(
        self,
        node_id: str,
        kind: Union[NodeKind, str] = NodeKind.ARTIFACT,
        timestamp: Optional[int] = None,
        metadata: Optional[str] = None,
    ) -> int:
        """Register a node and return its dense index.

        Re-adding an id with the same kind returns the existing index.
        """
        self._check_open()
        kind = NodeKind.parse(kind)
        idx = self._index.get(node_id)
        if idx is not None:
            if self._kinds[idx] != kind:
                raise KindConflict(
                    f"{node_id!r} already registered as {NodeKind(self._kinds[idx]).label}"
                )
            return idx
        validate_node_id(node_id)
        idx = len(self._ids)
        self._index[node_id] = idx
        self._ids.append(node_id)
        self._kinds.append(int(kind))
        self._timestamps.append(None if timestamp is None else int(timestamp))
        self._metadata.append(metadata)
        return idx

    def add_edge(self, src: str, dst: str, kind: Union[EdgeKind, str]) -> int:
        """Record ``src -> dst``; duplicates are collapsed onto the first index."""
        self._check_open()
        kind = EdgeKind.parse(kind)
        try:
            u = self._index[src]
        except KeyError:
            raise UnknownNode(f"unknown node {src!r}") from None
        try:
            v = self._index[dst]
        except KeyError:
            raise UnknownNode(f"unknown node {dst!r}") from None
        return self._add_edge_index(u, v, kind)

    def _add_edge_index(self, u: int, v: int, kind: EdgeKind) -> int:
        if u == v:
            raise SelfLoop(f"self-loop on {self._ids[u]!r}")
        if not self.relaxed:
            want_src, want_dst = _ENDPOINT_RULES[kind]
            if self._kinds[u] != want_src or self._kinds[v] != want_dst:
                raise EndpointKindMismatch(
                    f"{kind.label} edge must run {want_src.label} -> {want_dst.label}: "
                    f"{self._ids[u]!r} ({NodeKind(self._kinds[u]).label}) -> "
                    f"{self._ids[v]!r} ({NodeKind(self._kinds[v]).label})"
                )
            if kind == EdgeKind.DEPENDENCY and _release_artifact(self._ids[u]) == self._ids[v]:
                raise SelfLoop(f"release {self._ids[u]!r} depends on its own artifact")
        key = (u, v, int(kind))
        idx = self._edges.get(key)
        if idx is None:
            idx = len(self._edges)
            self._edges[key] = idx
        return idx

    def finalize(self) -> "DependencyGraph":
        """Freeze into a :class:`DependencyGraph`.

        Node order is insertion order; adjacency lists are sorted by target
        index.  The builder rejects further mutation afterwards.
        """
        self._finalized = True
        n = len(self._ids)
        if self._edges:
            arr = np.array(list(self._edges), dtype=np.int64).reshape(-1, 3)
        else:
            arr = np.empty((0, 3), dtype=np.int64)
        ts = np.array(
            [_NO_TIMESTAMP if t is None else t for t in self._timestamps],
            dtype=np.int64,
        )
        return DependencyGraph._from_arrays(
            node_ids=tuple(self._ids),
            kinds=np.array(self._kinds, dtype=np.uint8).reshape(n),
            timestamps=ts.reshape(n),
            metadata=tuple(self._metadata),
            src=arr[:, 0],
            dst=arr[:, 1],
            edge_kinds=arr[:, 2].astype(np.uint8),
            relaxed=self.relaxed,
        )


def _csr(n: int, rows: np.ndarray, cols: np.ndarray, kinds: np.ndarray):
    order = np.lexsort((kinds, cols, rows))
    indptr = np.zeros(n + 1, dtype=np.int64)
    if len(rows):
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    indices = cols[order].astype(np.int64)
    k = kinds[order].astype(np.uint8)
    for a in (indptr, indices, k):
        a.flags.writeable = False
    return indptr, indices, k


class DependencyGraph:
    """Immutable directed graph over artifact and release nodes.

    Build one with :class:`GraphBuilder`, :func:`dgm.ingest.load_csv`,
    :func:`dgm.synth.generate` or :meth:`load`.

    Attributes
    ----------
    node_ids : tuple of str
        Coordinates in insertion order; position is the node index.
    kinds : ndarray of uint8
        :class:`NodeKind` per node.
    out_indptr, out_indices, out_kinds : ndarray
        Forward CSR adjacency with the edge kind of each entry.
    in_indptr, in_indices, in_kinds : ndarray
        Reverse CSR adjacency (exact transpose of the forward one).
    relaxed : bool
        True when the artifact/release endpoint rules were not enforced.
    """

    @classmethod
    def _from_arrays(
        cls,
        node_ids: tuple,
        kinds: np.ndarray,
        timestamps: np.ndarray,
        metadata: tuple,
        src: np.ndarray,
        dst: np.ndarray,
        edge_kinds: np.ndarray,
        relaxed: bool,
    ) -> "DependencyGraph":
        self = cls.__new__(cls)
        n = len(node_ids)
        self.node_ids = node_ids
        self.kinds = np.asarray(kinds, dtype=np.uint8)
        self.timestamps = np.asarray(timestamps, dtype=np.int64)
        self.kinds.flags.writeable = False
        self.timestamps.flags.writeable = False
        self.metadata = metadata
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        edge_kinds = np.asarray(edge_kinds, dtype=np.uint8)
        self.out_indptr, self.out_indices, self.out_kinds = _csr(n, src, dst, edge_kinds)
        self.in_indptr, self.in_indices, self.in_kinds = _csr(n, dst, src, edge_kinds)
        self.relaxed = bool(relaxed)
        self._index = None
        return self

    def __init__(self):
        raise TypeError("use GraphBuilder.finalize() or DependencyGraph.load()")

    # basic shape -----------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.out_indices)

    def __len__(self) -> int:
        return self.n_nodes

    def __repr__(self) -> str:
        return f"DependencyGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    def __contains__(self, node_id) -> bool:
        return node_id in self.index_map

    def __eq__(self, other) -> bool:
        if not isinstance(other, DependencyGraph):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()

    __hash__ = None

    @property
    def index_map(self) -> dict:
        if self._index is None:
            self._index = {nid: i for i, nid in enumerate(self.node_ids)}
        return self._index

    def index(self, node_id: str) -> int:
        try:
            return self.index_map[node_id]
        except KeyError:
            raise UnknownNode(f"unknown node {node_id!r}") from None

    def kind(self, node_id: str) -> NodeKind:
        return NodeKind(int(self.kinds[self.index(node_id)]))

    def timestamp(self, node_id: str) -> Optional[int]:
        t = int(self.timestamps[self.index(node_id)])
        return None if t == _NO_TIMESTAMP else t

    # adjacency -------------------------------------------------------

    def successors(self, i: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[i]:self.out_indptr[i + 1]]

    def predecessors(self, i: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[i]:self.in_indptr[i + 1]]

    @cached_property
    def out_degree(self) -> np.ndarray:
        d = np.diff(self.out_indptr)
        d.flags.writeable = False
        return d

    @cached_property
    def in_degree(self) -> np.ndarray:
        d = np.diff(self.in_indptr)
        d.flags.writeable = False
        return d

    @cached_property
    def edge_arrays(self) -> tuple:
        """``(src, dst, kind)`` arrays in forward CSR order."""
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int64), self.out_degree)
        return src, self.out_indices, self.out_kinds

    @cached_property
    def undirected(self) -> tuple:
        """Symmetrized simple adjacency as ``(indptr, indices)``.

        Reciprocal edges collapse to a single undirected neighbour.
        """
        src, dst, _ = self.edge_arrays
        n = self.n_nodes
        a = np.concatenate([src, dst])
        b = np.concatenate([dst, src])
        if len(a):
            key = np.unique(a * max(n, 1) + b)
            a, b = key // max(n, 1), key % max(n, 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        if len(a):
            np.cumsum(np.bincount(a, minlength=n), out=indptr[1:])
        indptr.flags.writeable = False
        b = b.astype(np.int64)
        b.flags.writeable = False
        return indptr, b

    def adjacency_lists(self, mode: str = "out") -> list:
        """Python lists of neighbour indices; fast to iterate in pure-Python kernels."""
        if mode == "out":
            indptr, indices = self.out_indptr, self.out_indices
        elif mode == "in":
            indptr, indices = self.in_indptr, self.in_indices
        elif mode == "undirected":
            indptr, indices = self.undirected
        else:
            raise ValueError(f"mode must be 'out', 'in' or 'undirected', got {mode!r}")
        flat = indices.tolist()
        bounds = indptr.tolist()
        return [flat[bounds[i]:bounds[i + 1]] for i in range(self.n_nodes)]

    def edges(self) -> Iterator[tuple[str, str, EdgeKind]]:
        src, dst, kind = self.edge_arrays
        ids = self.node_ids
        for u, v, k in zip(src.tolist(), dst.tolist(), kind.tolist()):
            yield ids[u], ids[v], EdgeKind(k)

    # derived graphs --------------------------------------------------

    def subgraph(self, nodes: Iterable[int]) -> "DependencyGraph":
        """Induced subgraph on node *indices*, kept in original node order."""
        keep = np.zeros(self.n_nodes, dtype=bool)
        idx = np.fromiter(nodes, dtype=np.int64)
        keep[idx] = True
        return self.induced(keep)

    def induced(self, mask: np.ndarray) -> "DependencyGraph":
        """Induced subgraph on the nodes where ``mask`` is true."""
        mask = np.asarray(mask, dtype=bool)
        old = np.flatnonzero(mask)
        remap = np.full(self.n_nodes, -1, dtype=np.int64)
        remap[old] = np.arange(len(old))
        src, dst, kind = self.edge_arrays
        e = mask[src] & mask[dst]
        return DependencyGraph._from_arrays(
            node_ids=tuple(self.node_ids[i] for i in old.tolist()),
            kinds=self.kinds[old],
            timestamps=self.timestamps[old],
            metadata=tuple(self.metadata[i] for i in old.tolist()),
            src=remap[src[e]],
            dst=remap[dst[e]],
            edge_kinds=kind[e],
            relaxed=self.relaxed,
        )

    def reverse(self) -> "DependencyGraph":
        """Transpose.  Endpoint rules no longer hold, so the result is relaxed."""
        src, dst, kind = self.edge_arrays
        return DependencyGraph._from_arrays(
            self.node_ids, self.kinds, self.timestamps, self.metadata,
            dst, src, kind, relaxed=True,
        )

    def to_networkx(self):
        import networkx as nx

        g = nx.DiGraph()
        for i, nid in enumerate(self.node_ids):
            g.add_node(nid, kind=NodeKind(int(self.kinds[i])).label)
        for u, v, k in self.edges():
            g.add_edge(u, v, kind=k.label)
        return g

    # snapshot --------------------------------------------------------

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        self._write(buf)
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "DependencyGraph":
        return cls._read(io.BytesIO(data))

    def save(self, path: Union[str, PathLike]) -> None:
        with open(path, "wb") as fh:
            self._write(fh)

    @classmethod
    def load(cls, path: Union[str, PathLike]) -> "DependencyGraph":
        with open(path, "rb") as fh:
            return cls._read(fh)

    def _write(self, fh) -> None:
        n, m = self.n_nodes, self.n_edges
        fh.write(_HEADER.pack(MAGIC, SNAPSHOT_VERSION, int(self.relaxed), n, m))
        fh.write(self.kinds.astype("<u1").tobytes())
        fh.write(self.timestamps.astype("<i8").tobytes())
        _write_strings(fh, self.node_ids)
        has_meta = np.array([s is not None for s in self.metadata], dtype="<u1")
        fh.write(has_meta.tobytes())
        _write_strings(fh, [s or "" for s in self.metadata])
        fh.write(self.out_indptr.astype("<u8").tobytes())
        fh.write(self.out_indices.astype("<u4").tobytes())
        fh.write(self.out_kinds.astype("<u1").tobytes())

    @classmethod
    def _read(cls, fh) -> "DependencyGraph":
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise SnapshotError("truncated header")
        magic, version, flags, n, m = _HEADER.unpack(head)
        if magic != MAGIC:
            raise SnapshotError(f"bad magic {magic!r}")
        if version != SNAPSHOT_VERSION:
            raise SnapshotError(f"unsupported snapshot version {version}")
        kinds = _read_array(fh, "<u1", n)
        timestamps = _read_array(fh, "<i8", n)
        ids = _read_strings(fh, n)
        has_meta = _read_array(fh, "<u1", n)
        meta = _read_strings(fh, n)
        metadata = tuple(s if h else None for s, h in zip(meta, has_meta.tolist()))
        indptr = _read_array(fh, "<u8", n + 1).astype(np.int64)
        indices = _read_array(fh, "<u4", m).astype(np.int64)
        ekinds = _read_array(fh, "<u1", m)
        if fh.read(1):
            raise SnapshotError("trailing bytes after adjacency")
        if indptr[0] != 0 or indptr[-1] != m or np.any(np.diff(indptr) < 0):
            raise SnapshotError("adjacency offsets do not match edge count")
        if m and indices.max() >= n:
            raise SnapshotError("edge target out of range")
        src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
        return cls._from_arrays(
            tuple(ids), kinds, timestamps, metadata, src, indices, ekinds,
            relaxed=bool(flags & 1),
        )


MAGIC = b"DGM1"
SNAPSHOT_VERSION = 1
# magic, version, flags, n_nodes, n_edges
_HEADER = struct.Struct("<4sHHQQ")


def _write_strings(fh, strings: Sequence[str]) -> None:
    blobs = [s.encode("utf-8") for s in strings]
    offsets = np.zeros(len(blobs) + 1, dtype="<u8")
    if blobs:
        np.cumsum([len(b) for b in blobs], out=offsets[1:])
    fh.write(offsets.tobytes())
    fh.write(b"".join(blobs))


def _read_array(fh, dtype: str, count: int) -> np.ndarray:
    size = np.dtype(dtype).itemsize * count
    raw = fh.read(size)
    if len(raw) != size:
        raise SnapshotError("truncated snapshot")
    return np.frombuffer(raw, dtype=dtype, count=count)


def _read_strings(fh, count: int) -> list:
    offsets = _read_array(fh, "<u8", count + 1).tolist()
    blob = fh.read(offsets[-1])
    if len(blob) != offsets[-1]:
        raise SnapshotError("truncated string table")
    return [blob[offsets[i]:offsets[i + 1]].decode("utf-8") for i in range(count)]


def degree(graph: DependencyGraph, node: str) -> tuple[int, int]:
    """``(in_degree, out_degree)`` of ``node``, counting both edge kinds."""
    i = graph.index(node)
    return int(graph.in_degree[i]), int(graph.out_degree[i])
