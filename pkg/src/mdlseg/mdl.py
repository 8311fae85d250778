"""Two-part code length of a segmented SBM fit, in bits.

The criterion splits into a model part (number of change points, their
spacing, community labels, and one parameter cost of 0.5*log2(N_kl) per
estimated block probability) and a residual part (the negative Bernoulli
block log-likelihood).  Smaller is better.

These functions are the readable reference path; the community search
maintains the same quantities incrementally (see ``community.py``) and
is cross-checked against this module in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidSegmentationError, UnassignedNodeError
from .graphs import GraphSequence, SegmentView, active_nodes
from .sbm import (
    BlockCounts,
    CommunityAssignment,
    LinkProbs,
    block_counts,
    block_log_likelihood,
    mle_link_probs,
)

PAIR_COUNTING_MODES = ("snapshot", "segment")
CHANGEPOINT_CODES = ("lengths", "bound")


@dataclass(frozen=True)
class MdlConfig:
    """Switches for the two spots where the criterion is underdetermined.

    pair_counting
        "snapshot": N_kl at time t counts pairs of nodes with degree >= 1
        at t (default).  "segment": pairs of all segment-active nodes.
    changepoint_code
        "lengths": sum of log2(segment length + 1) terms (default).
        "bound": M * log2(T), which upper-bounds each location by T.
    """

    pair_counting: str = "snapshot"
    changepoint_code: str = "lengths"

    def __post_init__(self):
        if self.pair_counting not in PAIR_COUNTING_MODES:
            raise ValueError(f"pair_counting must be one of {PAIR_COUNTING_MODES}")
        if self.changepoint_code not in CHANGEPOINT_CODES:
            raise ValueError(f"changepoint_code must be one of {CHANGEPOINT_CODES}")


@dataclass(frozen=True)
class Segmentation:
    """Change points plus one community assignment per segment.

    ``probs`` optionally pins explicit per-snapshot link probabilities
    (one :class:`LinkProbs` per t in 1..T).  When ``None`` the criterion
    profiles them out at the per-snapshot maximum-likelihood estimate,
    which is what every search routine does.
    """

    change_points: tuple[int, ...]
    assignments: tuple[CommunityAssignment, ...]
    probs: tuple[LinkProbs, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "change_points", tuple(self.change_points))
        object.__setattr__(self, "assignments", tuple(self.assignments))
        if self.probs is not None:
            object.__setattr__(self, "probs", tuple(self.probs))

    @property
    def num_change_points(self) -> int:
        return len(self.change_points)


def segment_bounds(change_points: Sequence[int], T: int) -> list[SegmentView]:
    """Half-open segments induced by change points, using t_0=1, t_{M+1}=T+1."""
    tau = list(change_points)
    if tau != sorted(set(tau)):
        raise InvalidSegmentationError(f"change points must be strictly increasing, got {tau}")
    if tau and not (2 <= tau[0] and tau[-1] <= T):
        raise InvalidSegmentationError(f"change points must lie in [2, {T}], got {tau}")
    edges = [1] + tau + [T + 1]
    return [SegmentView(a, b) for a, b in zip(edges[:-1], edges[1:])]


def counted_nodes_at(
    seq: GraphSequence, seg: SegmentView, t: int, config: MdlConfig
) -> frozenset[int]:
    """Nodes whose pairs enter N_kl at time t, per the configured mode."""
    if config.pair_counting == "snapshot":
        return seq.active_at(t)
    return active_nodes(seq, seg)


def _validate(seq: GraphSequence, s: Segmentation) -> list[SegmentView]:
    segs = segment_bounds(s.change_points, seq.T)
    if len(s.assignments) != len(segs):
        raise InvalidSegmentationError(
            f"need {len(segs)} assignments for {len(s.change_points)} change points, "
            f"got {len(s.assignments)}"
        )
    for seg, assign in zip(segs, s.assignments):
        act = active_nodes(seq, seg)
        missing = act - assign.nodes
        if missing:
            raise UnassignedNodeError(min(missing))
        extra = assign.nodes - act
        if extra:
            raise InvalidSegmentationError(
                f"assignment for segment [{seg.start},{seg.end_exclusive}) "
                f"covers inactive nodes {sorted(extra)[:5]}"
            )
    if s.probs is not None:
        if len(s.probs) != seq.T:
            raise InvalidSegmentationError(f"probs must have one entry per t=1..{seq.T}")
        for seg, assign in zip(segs, s.assignments):
            for t in seg.times():
                if s.probs[t - 1].num_communities != assign.num_communities:
                    raise InvalidSegmentationError(
                        f"probs at t={t} sized for {s.probs[t - 1].num_communities} "
                        f"communities, segment has {assign.num_communities}"
                    )
    return segs


def _param_cost_bits(counts: BlockCounts) -> float:
    # 0.5*log2(N_kl) per estimated block probability; blocks with no
    # possible pair carry no parameter.
    total = 0.0
    for _, _, _, n in counts.iter_blocks():
        if n > 0:
            total += 0.5 * math.log2(n)
    return total


def model_code_length(seq: GraphSequence, s: Segmentation, config: MdlConfig = MdlConfig()) -> float:
    """Bits to encode the fitted model itself."""
    segs = _validate(seq, s)
    M = s.num_change_points
    total = math.log2(M + 1)
    if config.changepoint_code == "lengths":
        for seg in segs:
            total += math.log2(seg.length + 1)
    else:
        total += M * math.log2(seq.T)
    for seg, assign in zip(segs, s.assignments):
        n_active = len(active_nodes(seq, seg))
        total += (1 + n_active) * math.log2(assign.num_communities)
        for t in seg.times():
            counted = counted_nodes_at(seq, seg, t, config)
            counts = block_counts(seq.snapshot(t), assign, counted)
            total += _param_cost_bits(counts)
    return total


def residual_code_length(
    seq: GraphSequence, s: Segmentation, config: MdlConfig = MdlConfig()
) -> float:
    """Bits left unexplained by the model: the negative block log-likelihood."""
    segs = _validate(seq, s)
    total = 0.0
    for seg, assign in zip(segs, s.assignments):
        for t in seg.times():
            counted = counted_nodes_at(seq, seg, t, config)
            counts = block_counts(seq.snapshot(t), assign, counted)
            probs = s.probs[t - 1] if s.probs is not None else mle_link_probs(counts)
            total -= block_log_likelihood(counts, probs)
    return total


def full_mdl(seq: GraphSequence, s: Segmentation, config: MdlConfig = MdlConfig()) -> float:
    """Model plus residual code length of the segmentation."""
    return model_code_length(seq, s, config) + residual_code_length(seq, s, config)


def segment_mdl(
    seq: GraphSequence,
    seg: SegmentView,
    assign: CommunityAssignment,
    config: MdlConfig = MdlConfig(),
) -> float:
    """Segment-local criterion: label cost, parameter cost, and residual.

    Probabilities are profiled out at the per-snapshot MLE.  Boundary
    terms (log2(M+1) and the segment-length code) live outside; summing
    this over all segments and adding those terms reproduces
    :func:`full_mdl`.
    """
    act = active_nodes(seq, seg)
    missing = act - assign.nodes
    if missing:
        raise UnassignedNodeError(min(missing))
    total = (1 + len(act)) * math.log2(assign.num_communities)
    for t in seg.times():
        counted = counted_nodes_at(seq, seg, t, config)
        counts = block_counts(seq.snapshot(t), assign, counted)
        total += _param_cost_bits(counts)
        total -= block_log_likelihood(counts, mle_link_probs(counts))
    return total


def mle_probs_for(
    seq: GraphSequence, s: Segmentation, config: MdlConfig = MdlConfig()
) -> tuple[LinkProbs, ...]:
    """Per-snapshot MLE link probabilities under the segmentation."""
    segs = _validate(seq, Segmentation(s.change_points, s.assignments, None))
    out: list[LinkProbs | None] = [None] * seq.T
    for seg, assign in zip(segs, s.assignments):
        for t in seg.times():
            counted = counted_nodes_at(seq, seg, t, config)
            out[t - 1] = mle_link_probs(block_counts(seq.snapshot(t), assign, counted))
    return tuple(out)  # type: ignore[arg-type]
