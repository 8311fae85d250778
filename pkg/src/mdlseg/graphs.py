"""Aligned sequences of simple undirected graphs.

Snapshots share one dense node index space but each snapshot only
"activates" the nodes that carry at least one edge at that time.  Edge
sets are kept sparse; there is never an N x N matrix in memory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySequenceError, OutOfBoundsError, SelfLoopError


@dataclass(frozen=True)
class NodeId:
    """Dense index paired with the external label it stands for."""

    index: int
    label: str


class Snapshot:
    """One time point's graph as a set of unordered node-index pairs.

    Edges are canonicalized to ``(i, j)`` with ``i < j`` and stored once;
    self-loops are rejected.
    """

    __slots__ = ("t", "edges")

    def __init__(self, t: int, edges: Iterable[tuple[int, int]]):
        canon = set()
        for i, j in edges:
            if i == j:
                raise SelfLoopError(i)
            canon.add((i, j) if i < j else (j, i))
        self.t = int(t)
        self.edges: frozenset[tuple[int, int]] = frozenset(canon)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return ((i, j) if i < j else (j, i)) in self.edges

    def active(self) -> frozenset[int]:
        """Indices with degree >= 1 in this snapshot."""
        out: set[int] = set()
        for i, j in self.edges:
            out.add(i)
            out.add(j)
        return frozenset(out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Snapshot)
            and self.t == other.t
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.t, self.edges))

    def __repr__(self) -> str:
        return f"Snapshot(t={self.t}, edges={self.num_edges})"


@dataclass(frozen=True)
class SegmentView:
    """Half-open time window ``[start, end_exclusive)`` into a sequence."""

    start: int
    end_exclusive: int

    def __post_init__(self):
        if not (1 <= self.start < self.end_exclusive):
            raise OutOfBoundsError(
                f"segment [{self.start}, {self.end_exclusive}) is empty or starts before t=1"
            )

    @property
    def length(self) -> int:
        return self.end_exclusive - self.start

    def times(self) -> range:
        return range(self.start, self.end_exclusive)


class GraphSequence:
    """Ordered snapshots over one shared node universe.

    Immutable after construction; all accessors are safe to share across
    concurrent workers.  Snapshot times are 1-based and consecutive.
    """

    def __init__(self, snapshots: Sequence[Snapshot], node_universe: Sequence[NodeId]):
        if not snapshots:
            raise EmptySequenceError("a sequence needs at least one snapshot")
        n = len(node_universe)
        for pos, nid in enumerate(node_universe):
            if nid.index != pos:
                raise ValueError(f"node universe must be dense: slot {pos} holds index {nid.index}")
        labels = [nid.label for nid in node_universe]
        if len(set(labels)) != n:
            raise ValueError("node labels must be unique")
        for pos, snap in enumerate(snapshots):
            if snap.t != pos + 1:
                raise ValueError(f"snapshot times must run 1..T, got t={snap.t} at position {pos}")
            for i, j in snap.edges:
                if not (0 <= i < n and 0 <= j < n):
                    raise ValueError(f"edge ({i},{j}) uses an index outside [0,{n})")
        self.snapshots: tuple[Snapshot, ...] = tuple(snapshots)
        self.node_universe: tuple[NodeId, ...] = tuple(node_universe)
        self._index_of = {nid.label: nid.index for nid in node_universe}
        self._active: list[frozenset[int] | None] = [None] * len(snapshots)
        self._csr: list[tuple[np.ndarray, np.ndarray] | None] = [None] * len(snapshots)

    @property
    def T(self) -> int:
        return len(self.snapshots)

    @property
    def N(self) -> int:
        return len(self.node_universe)

    def snapshot(self, t: int) -> Snapshot:
        if not (1 <= t <= self.T):
            raise OutOfBoundsError(f"t={t} outside [1, {self.T}]")
        return self.snapshots[t - 1]

    def index_of(self, label: str) -> int:
        return self._index_of[label]

    def label_of(self, index: int) -> str:
        return self.node_universe[index].label

    def active_at(self, t: int) -> frozenset[int]:
        """Indices with degree >= 1 at time t (cached)."""
        snap = self.snapshot(t)
        cached = self._active[t - 1]
        if cached is None:
            cached = snap.active()
            self._active[t - 1] = cached
        return cached

    def csr_at(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency of snapshot t as (indptr, indices) over the full index space."""
        cached = self._csr[t - 1]
        if cached is None:
            snap = self.snapshot(t)
            if snap.edges:
                e = np.array(sorted(snap.edges), dtype=np.int64)
                rows = np.concatenate([e[:, 0], e[:, 1]])
                cols = np.concatenate([e[:, 1], e[:, 0]])
                order = np.lexsort((cols, rows))
                indptr = np.zeros(self.N + 1, dtype=np.int64)
                np.cumsum(np.bincount(rows, minlength=self.N), out=indptr[1:])
                indices = cols[order]
            else:
                indptr = np.zeros(self.N + 1, dtype=np.int64)
                indices = np.zeros(0, dtype=np.int64)
            cached = (indptr, indices)
            self._csr[t - 1] = cached
        return cached

    def __repr__(self) -> str:
        return f"GraphSequence(T={self.T}, N={self.N})"


def build_sequence(
    edge_lists: Sequence[Sequence[tuple[str, str]]],
    isolated_labels: Iterable[str] = (),
) -> GraphSequence:
    """Build a sequence from per-snapshot lists of label pairs.

    Labels are mapped to dense indices in first-appearance order.
    Duplicate pairs within a snapshot collapse to one edge; a pair
    ``(a, a)`` raises :class:`SelfLoopError`.  ``isolated_labels`` may
    register nodes that never carry an edge.
    """
    if not edge_lists:
        raise EmptySequenceError("no snapshots given")
    index: dict[str, int] = {}

    def to_index(label: str) -> int:
        got = index.get(label)
        if got is None:
            got = len(index)
            index[label] = got
        return got

    snaps = []
    for pos, pairs in enumerate(edge_lists):
        edges = set()
        for a, b in pairs:
            if a == b:
                raise SelfLoopError(a)
            i, j = to_index(a), to_index(b)
            edges.add((i, j) if i < j else (j, i))
        snaps.append(Snapshot(pos + 1, edges))
    for label in isolated_labels:
        to_index(label)
    universe = [NodeId(i, label) for label, i in sorted(index.items(), key=lambda kv: kv[1])]
    return GraphSequence(snaps, universe)


def export_edge_lists(seq: GraphSequence) -> list[list[tuple[str, str]]]:
    """Inverse of :func:`build_sequence` up to edge ordering (sorted here)."""
    out = []
    for snap in seq.snapshots:
        pairs = [
            (seq.label_of(i), seq.label_of(j)) for i, j in sorted(snap.edges)
        ]
        out.append(pairs)
    return out


def _check_bounds(seq: GraphSequence, seg: SegmentView) -> None:
    if seg.end_exclusive > seq.T + 1:
        raise OutOfBoundsError(
            f"segment [{seg.start}, {seg.end_exclusive}) exceeds T+1={seq.T + 1}"
        )


def aggregate(seq: GraphSequence, seg: SegmentView) -> Snapshot:
    """Binarized union of all snapshot edge sets in the segment."""
    _check_bounds(seq, seg)
    edges: set[tuple[int, int]] = set()
    for t in seg.times():
        edges |= seq.snapshot(t).edges
    return Snapshot(seg.start, edges)


def active_nodes(seq: GraphSequence, seg: SegmentView) -> frozenset[int]:
    """Indices with degree >= 1 in at least one covered snapshot."""
    _check_bounds(seq, seg)
    out: set[int] = set()
    for t in seg.times():
        out |= seq.active_at(t)
    return frozenset(out)
