"""Per-segment community search.

The search recursively bisects communities (an initial 2-coloring
followed by single-node switch sweeps), keeps a split only when it
strictly lowers the segment criterion, then greedily merges neighboring
communities, and cycles split+merge until the criterion stops dropping.
A final polish pass guarantees the output is a single-switch local
optimum across all communities.

The default initial 2-coloring is the sign split of the second
eigenvector of the segment's summed overlay (restricted to the subset
being bisected); ``init="random"`` uses a seeded coin flip per node
instead.  Random inits sit on a likelihood plateau for dense balanced
blocks and the sweeps then order into density artifacts, so the spectral
start is the default.  Both are deterministic under a fixed seed.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable

import numpy as np

from . import _kernel as K
from .errors import InvalidSegmentationError, UnassignedNodeError
from .graphs import GraphSequence, SegmentView, active_nodes, _check_bounds
from .mdl import MdlConfig
from .sbm import CommunityAssignment

# Strict-decrease threshold in bits: moves, splits, and merges must beat
# this to be kept, which also guarantees termination.
EPS = 1e-9
MAX_CYCLES = 10
_MAX_SWEEPS = 10_000

# Splits never create communities below this size.  Blocks built from
# singleton or pair communities have at most one possible edge, which the
# criterion encodes for free (0.5*log2(1) parameter bits, zero residual),
# so an unrestricted search tunnels into an all-singletons labeling that
# no honest fit can beat.  Three nodes is the smallest size whose blocks
# carry real statistics.
MIN_COMMUNITY_SIZE = 3


class SegmentState:
    """Mutable block-count state of one segment under a working labeling.

    Labels are 0-based slot ids over the segment-active nodes; the public
    :class:`CommunityAssignment` view renumbers them 1..c by size.
    Outside an in-flight split attempt every slot is non-empty.
    """

    def __init__(self, seq: GraphSequence, seg: SegmentView, config: MdlConfig = MdlConfig()):
        _check_bounds(seq, seg)
        self.seq = seq
        self.seg = seg
        self.config = config
        self.nodes = np.array(sorted(active_nodes(seq, seg)), dtype=np.int64)
        self.n = int(self.nodes.size)
        tseg = seg.length
        glob2loc = np.full(seq.N, -1, dtype=np.int64)
        glob2loc[self.nodes] = np.arange(self.n)

        self.indptr = np.zeros((tseg, self.n + 1), dtype=np.int64)
        self.counted = np.zeros((tseg, self.n), dtype=np.bool_)
        chunks = []
        offsets = np.zeros(tseg, dtype=np.int64)
        pos = 0
        for ti, t in enumerate(seg.times()):
            gp, gi = seq.csr_at(t)
            offsets[ti] = pos
            if self.n == 0:
                continue
            degrees = gp[self.nodes + 1] - gp[self.nodes]
            np.cumsum(degrees, out=self.indptr[ti, 1:])
            if degrees.sum() > 0:
                # neighbor lists concatenated in row order; empty rows add nothing
                chunk = np.concatenate(
                    [gi[gp[g]:gp[g + 1]] for g in self.nodes if gp[g + 1] > gp[g]]
                )
                chunks.append(glob2loc[chunk])
            pos += int(degrees.sum())
            if self.config.pair_counting == "snapshot":
                self.counted[ti] = degrees > 0
            else:
                self.counted[ti] = True
        self.indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
        self.offsets = offsets

        # summed overlay of the segment's snapshots; drives spectral splits
        self._overlay = np.zeros((self.n, self.n))
        for ti in range(tseg):
            degrees = self.indptr[ti, 1:] - self.indptr[ti, :-1]
            rows = np.repeat(np.arange(self.n), degrees)
            lo, hi = self.offsets[ti], self.offsets[ti] + int(degrees.sum())
            np.add.at(self._overlay, (rows, self.indices[lo:hi]), 1.0)

        self.labels = np.zeros(self.n, dtype=np.int64)
        self.c = 1
        self._rebuild()

    # -- bookkeeping ---------------------------------------------------

    def _rebuild(self) -> None:
        self.E, self.sizes, self.D = K.build_block_arrays(
            self.labels, self.c, self.indptr, self.indices, self.offsets, self.counted
        )
        self.blocks = K.total_blocks_cost(self.E, self.sizes)
        self.slot_count = np.bincount(self.labels, minlength=self.c).astype(np.int64)
        self.c_eff = int(np.count_nonzero(self.slot_count))

    def resync(self) -> None:
        """Recompute the accumulated blocks cost from scratch (kills float drift)."""
        self.blocks = K.total_blocks_cost(self.E, self.sizes)

    def value(self) -> float:
        """Current segment criterion in bits (label cost + blocks cost)."""
        if self.n == 0:
            return 0.0
        return (1 + self.n) * math.log2(self.c_eff) + self.blocks

    def set_assignment(self, assign: CommunityAssignment) -> None:
        act = set(int(g) for g in self.nodes)
        missing = act - set(assign.assignment)
        if missing:
            raise UnassignedNodeError(min(missing))
        extra = set(assign.assignment) - act
        if extra:
            raise InvalidSegmentationError(
                f"assignment covers nodes outside the segment's active set: {sorted(extra)[:5]}"
            )
        for li, g in enumerate(self.nodes):
            self.labels[li] = assign.assignment[int(g)] - 1
        self.c = assign.num_communities
        self._rebuild()

    def assignment(self) -> CommunityAssignment:
        if self.n == 0:
            return CommunityAssignment({}, 1)
        mapping = {int(g): int(self.labels[li]) for li, g in enumerate(self.nodes)}
        return CommunityAssignment.from_labels(mapping)

    # -- moves ----------------------------------------------------------

    def _refine_pair(self, members: np.ndarray, ka: int, kb: int, rng: np.random.Generator) -> None:
        for _ in range(_MAX_SWEEPS):
            order = rng.permutation(members.size)
            nsw, dblocks, c_eff = K.sweep_pair(
                self.labels, self.E, self.sizes, self.D, self.counted,
                self.indptr, self.indices, self.offsets,
                members, order, ka, kb, self.slot_count,
                float(1 + self.n), self.c_eff, EPS,
            )
            self.blocks += dblocks
            self.c_eff = int(c_eff)
            if nsw == 0:
                return
        raise AssertionError("refinement failed to converge")

    def _initial_sides(self, members: np.ndarray, rng: np.random.Generator, init: str) -> np.ndarray:
        if init == "spectral":
            side = self._spectral_sides(members)
            if side is not None:
                return side
        return rng.integers(0, 2, size=members.size).astype(np.bool_)

    def _spectral_sides(self, members: np.ndarray) -> np.ndarray | None:
        # Sign of the second eigenvector of the summed overlay restricted
        # to the subset; falls back to random when degenerate.
        sub = self._overlay[np.ix_(members, members)]
        if not sub.any() or members.size < 2:
            return None
        _, vecs = np.linalg.eigh(sub)
        side = vecs[:, -2] > 0
        if side.all() or not side.any():
            return None
        return side

    def attempt_split(self, k: int, rng: np.random.Generator, init: str = "spectral") -> bool:
        """Try to bisect community slot k; keep only a strict improvement."""
        members = np.flatnonzero(self.labels == k).astype(np.int64)
        if members.size < 2:
            return False
        before_labels = self.labels.copy()
        before_c = self.c
        before_value = self.value()
        knew = self.c
        self.c += 1
        side = self._initial_sides(members, rng, init)
        self.labels[members[side]] = knew
        self._rebuild()
        self._refine_pair(members, k, knew, rng)
        ok = (
            self.slot_count[k] >= MIN_COMMUNITY_SIZE
            and self.slot_count[knew] >= MIN_COMMUNITY_SIZE
            and self.value() < before_value - EPS
        )
        if not ok:
            self.labels = before_labels
            self.c = before_c
            self._rebuild()
            return False
        return True

    def split_all(self, rng: np.random.Generator, init: str = "spectral") -> bool:
        """Recursively attempt to split every community until none splits."""
        improved = False
        queue = deque(range(self.c))
        while queue:
            k = queue.popleft()
            if self.attempt_split(k, rng, init):
                improved = True
                queue.append(k)
                queue.append(self.c - 1)
        return improved

    def merge_once(self) -> bool:
        """Apply the single merge with the largest criterion drop, if any."""
        if self.c < 2:
            return False
        inter = self.E.sum(axis=0)
        best_pair = None
        best_delta = -EPS
        dlabel = (1 + self.n) * (math.log2(self.c - 1) - math.log2(self.c)) if self.c > 1 else 0.0
        for ka in range(self.c):
            for kb in range(ka + 1, self.c):
                if inter[ka, kb] <= 0:
                    continue  # only neighbors in the union graph can merge
                d = K.merge_delta_blocks(self.E, self.sizes, ka, kb) + dlabel
                if d < best_delta:
                    best_delta = d
                    best_pair = (ka, kb)
        if best_pair is None:
            return False
        ka, kb = best_pair
        self.labels[self.labels == kb] = ka
        self.labels[self.labels > kb] -= 1
        self.c -= 1
        self._rebuild()
        return True

    def merge_until_stable(self) -> bool:
        improved = False
        while self.merge_once():
            improved = True
        return improved

    def polish(self, rng: np.random.Generator) -> bool:
        """Single-node best-target sweeps until no switch improves."""
        if self.n == 0 or self.c < 2:
            return False
        improved = False
        for _ in range(_MAX_SWEEPS):
            order = rng.permutation(self.n)
            nsw, dblocks, c_eff = K.sweep_best_target(
                self.labels, self.E, self.sizes, self.D, self.counted,
                self.indptr, self.indices, self.offsets,
                order, self.slot_count, float(1 + self.n), self.c_eff, EPS,
                MIN_COMMUNITY_SIZE,
            )
            self.blocks += dblocks
            self.c_eff = int(c_eff)
            if np.any(self.slot_count == 0):
                self._compact()
            if nsw == 0:
                return improved
            improved = True
        raise AssertionError("polish failed to converge")

    def _compact(self) -> None:
        keep = np.flatnonzero(self.slot_count > 0)
        remap = np.full(self.c, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        self.labels = remap[self.labels]
        self.c = int(keep.size)
        self._rebuild()

    def run(self, rng: np.random.Generator, init: str = "spectral", max_cycles: int = MAX_CYCLES) -> None:
        """Full search: cycles of recursive splits + merges, then polish."""
        if self.n == 0:
            return
        prev = self.value()
        for _ in range(max_cycles):
            self.split_all(rng, init)
            self.merge_until_stable()
            now = self.value()
            if now >= prev - EPS:
                break
            prev = now
        for _ in range(max_cycles):
            if not self.polish(rng):
                break
            self.merge_until_stable()
        self.resync()


def fit_segment(
    seq: GraphSequence,
    seg: SegmentView,
    rng_seed,
    *,
    config: MdlConfig = MdlConfig(),
    init: str = "spectral",
    max_cycles: int = MAX_CYCLES,
) -> tuple[CommunityAssignment, float]:
    """Run the community search; return (assignment, segment criterion bits)."""
    state = SegmentState(seq, seg, config)
    rng = np.random.default_rng(rng_seed)
    state.run(rng, init=init, max_cycles=max_cycles)
    return state.assignment(), state.value()


def detect_communities(
    seq: GraphSequence,
    seg: SegmentView,
    rng_seed,
    *,
    config: MdlConfig = MdlConfig(),
    init: str = "spectral",
    max_cycles: int = MAX_CYCLES,
) -> CommunityAssignment:
    """Community assignment minimizing the segment criterion.

    Deterministic under a fixed seed.  A segment with no community
    structure comes back as a single community.
    """
    assign, _ = fit_segment(seq, seg, rng_seed, config=config, init=init, max_cycles=max_cycles)
    return assign


def bisect_refine(
    seq: GraphSequence,
    seg: SegmentView,
    node_subset: Iterable[int],
    rng_seed,
    *,
    context: CommunityAssignment | None = None,
    config: MdlConfig = MdlConfig(),
    init: str = "spectral",
) -> tuple[frozenset[int], ...]:
    """Refined 2-coloring of ``node_subset`` scored against the whole segment.

    Returns one part when no strict improvement over keeping the subset
    together exists (including the case where refinement empties a side),
    else the two parts.  ``context`` fixes the labels of all other nodes;
    by default everything sits in one community.
    """
    state = SegmentState(seq, seg, config)
    if context is not None:
        state.set_assignment(context)
    subset = sorted(set(int(i) for i in node_subset))
    if not subset:
        raise InvalidSegmentationError("node_subset is empty")
    glob2loc = {int(g): li for li, g in enumerate(state.nodes)}
    try:
        members = np.array([glob2loc[g] for g in subset], dtype=np.int64)
    except KeyError as exc:
        raise InvalidSegmentationError(f"node {exc.args[0]} is not active in the segment") from None
    slots = {int(state.labels[li]) for li in members}
    if len(slots) != 1:
        raise InvalidSegmentationError("node_subset must lie within a single community")
    k = slots.pop()
    if members.size < 2:
        return (frozenset(subset),)

    rng = np.random.default_rng(rng_seed)
    before_value = state.value()
    knew = state.c
    state.c += 1
    side = state._initial_sides(members, rng, init)
    state.labels[members[side]] = knew
    state._rebuild()
    state._refine_pair(members, k, knew, rng)

    part_a = frozenset(int(state.nodes[li]) for li in members if state.labels[li] == k)
    part_b = frozenset(int(state.nodes[li]) for li in members if state.labels[li] == knew)
    if (
        state.slot_count[k] < MIN_COMMUNITY_SIZE
        or state.slot_count[knew] < MIN_COMMUNITY_SIZE
        or state.value() >= before_value - EPS
    ):
        return (frozenset(subset),)
    return (part_a, part_b)


def merge_pass(
    seq: GraphSequence,
    seg: SegmentView,
    assign: CommunityAssignment,
    *,
    config: MdlConfig = MdlConfig(),
) -> CommunityAssignment:
    """Greedily merge neighbor communities while the criterion drops."""
    state = SegmentState(seq, seg, config)
    state.set_assignment(assign)
    state.merge_until_stable()
    return state.assignment()
