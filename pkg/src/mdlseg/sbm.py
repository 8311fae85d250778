"""Bernoulli block statistics for one snapshot under a community assignment.

All log quantities are in bits (base-2) so they can be summed directly
with code lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .errors import DomainError, UnassignedNodeError
from .graphs import Snapshot


@dataclass(frozen=True)
class CommunityAssignment:
    """Map from node index to a community id in ``1..num_communities``.

    Every community id must own at least one node.  The single sanctioned
    degenerate case is an empty assignment with ``num_communities == 1``
    (a segment with no active nodes).
    """

    assignment: Mapping[int, int]
    num_communities: int

    def __post_init__(self):
        c = self.num_communities
        if c < 1:
            raise ValueError("num_communities must be >= 1")
        object.__setattr__(self, "assignment", dict(self.assignment))
        if not self.assignment:
            if c != 1:
                raise ValueError("empty assignment only allowed with one community")
            return
        seen = set(self.assignment.values())
        if seen != set(range(1, c + 1)):
            raise ValueError(f"community ids must cover 1..{c} with no gaps, got {sorted(seen)}")

    @property
    def nodes(self) -> frozenset:
        return frozenset(self.assignment)

    def community_of(self, node) -> int:
        got = self.assignment.get(node)
        if got is None:
            raise UnassignedNodeError(node)
        return got

    def members(self, cid: int) -> frozenset:
        return frozenset(n for n, c in self.assignment.items() if c == cid)

    @classmethod
    def from_labels(cls, labels: Mapping) -> "CommunityAssignment":
        """Canonicalize arbitrary group keys to ids 1..c.

        Ids are ordered by decreasing community size, ties broken by the
        smallest member (under the natural ordering of the node keys).
        """
        groups: dict = {}
        for node, key in labels.items():
            groups.setdefault(key, []).append(node)
        ordered = sorted(groups.values(), key=lambda ns: (-len(ns), min(ns)))
        assignment = {node: cid for cid, members in enumerate(ordered, start=1) for node in members}
        return cls(assignment, max(1, len(ordered)))


@dataclass(frozen=True)
class BlockCounts:
    """Observed and possible edge tallies per unordered community pair.

    ``edges`` and ``possible`` are symmetric ``(c, c)`` integer arrays;
    the diagonal holds within-community values counted once.
    """

    num_communities: int
    edges: np.ndarray = field(repr=False)
    possible: np.ndarray = field(repr=False)

    def E(self, k: int, l: int) -> int:
        return int(self.edges[k - 1, l - 1])

    def N(self, k: int, l: int) -> int:
        return int(self.possible[k - 1, l - 1])

    def iter_blocks(self) -> Iterator[tuple[int, int, int, int]]:
        """Yield (k, l, E_kl, N_kl) for 1 <= k <= l <= c."""
        c = self.num_communities
        for k in range(1, c + 1):
            for l in range(k, c + 1):
                yield k, l, self.E(k, l), self.N(k, l)

    @property
    def total_edges(self) -> int:
        return sum(e for _, _, e, _ in self.iter_blocks())


@dataclass(frozen=True)
class LinkProbs:
    """Per-block link probabilities as a symmetric ``(c, c)`` matrix."""

    num_communities: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (self.num_communities, self.num_communities):
            raise DomainError(f"probs must be ({self.num_communities}, {self.num_communities})")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise DomainError("link probabilities must lie in [0, 1]")
        object.__setattr__(self, "probs", p)

    def P(self, k: int, l: int) -> float:
        return float(self.probs[k - 1, l - 1])


def block_counts(
    snap: Snapshot,
    assign: CommunityAssignment,
    counted_nodes,
) -> BlockCounts:
    """Tally E_kl and N_kl over unordered pairs of ``counted_nodes``.

    Edges with an endpoint outside ``counted_nodes`` are ignored.  Every
    counted node must be assigned, else :class:`UnassignedNodeError`.
    """
    counted = set(counted_nodes)
    c = assign.num_communities
    sizes = np.zeros(c, dtype=np.int64)
    for i in counted:
        cid = assign.assignment.get(i)
        if cid is None:
            raise UnassignedNodeError(i)
        sizes[cid - 1] += 1

    possible = np.outer(sizes, sizes)
    np.fill_diagonal(possible, sizes * (sizes - 1) // 2)

    edges = np.zeros((c, c), dtype=np.int64)
    for i, j in snap.edges:
        if i in counted and j in counted:
            a = assign.assignment[i] - 1
            b = assign.assignment[j] - 1
            edges[a, b] += 1
            if a != b:
                edges[b, a] += 1
    return BlockCounts(c, edges, possible)


def mle_link_probs(counts: BlockCounts) -> LinkProbs:
    """P_kl = E_kl / N_kl, with 0 for blocks that have no possible pair."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(counts.possible > 0, counts.edges / np.maximum(counts.possible, 1), 0.0)
    return LinkProbs(counts.num_communities, p)


def binary_entropy_bits(p: float) -> float:
    """H2(p) in bits with the 0*log0 = 0 convention."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def block_log_likelihood(counts: BlockCounts, probs: LinkProbs) -> float:
    """Sum over blocks of E*log2(P) + (N-E)*log2(1-P); always <= 0.

    Returns ``-inf`` when an observed configuration is impossible under
    ``probs`` (e.g. E > 0 with P = 0).
    """
    if probs.num_communities != counts.num_communities:
        raise DomainError("probs and counts disagree on the number of communities")
    total = 0.0
    for k, l, e, n in counts.iter_blocks():
        if n == 0:
            continue
        p = probs.P(k, l)
        if e > 0:
            if p == 0.0:
                return float("-inf")
            total += e * math.log2(p)
        if n - e > 0:
            if p == 1.0:
                return float("-inf")
            total += (n - e) * math.log2(1.0 - p)
    return total
