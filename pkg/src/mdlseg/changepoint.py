"""Change-point search over a network sequence.

Candidate times are screened by the normalized 1-norm distance between
consecutive adjacency matrices, then tested greedily in decreasing
distance order: a candidate is kept only when adding it lowers the full
criterion.  If nothing is kept, all candidates become provisional change
points.  A reverse-order merge pass then removes points whose removal
lowers the criterion.  Only the segments touched by a tentative change
are re-searched; sub-criterion values are memoized by segment bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .community import fit_segment
from .errors import DegenerateSnapshotError, InternalInvariantError
from .graphs import GraphSequence, SegmentView
from .mdl import MdlConfig, Segmentation, full_mdl, mle_probs_for, segment_bounds
from .sbm import CommunityAssignment


def consecutive_distances(seq: GraphSequence, *, zero_edges: str = "raise") -> list[float]:
    """d_t for t=2..T: 1-norm of the adjacency difference over the
    geometric mean of the edge masses.

    Both norms count every edge twice (full symmetric matrices), so the
    factors of two cancel and the value equals
    ``|E_{t-1} xor E_t| / sqrt(|E_{t-1}| * |E_t|)``.

    ``zero_edges`` controls snapshots without edges: "raise" (default)
    raises :class:`DegenerateSnapshotError`; "inf" yields ``inf`` so the
    boundary is maximally suspicious and the criterion arbitrates.
    """
    if seq.T < 2:
        raise ValueError("need at least two snapshots")
    if zero_edges not in ("raise", "inf"):
        raise ValueError("zero_edges must be 'raise' or 'inf'")
    out = []
    for t in range(2, seq.T + 1):
        prev = seq.snapshot(t - 1).edges
        cur = seq.snapshot(t).edges
        if not prev or not cur:
            if zero_edges == "raise":
                empty_t = t - 1 if not prev else t
                raise DegenerateSnapshotError(f"snapshot t={empty_t} has no edges")
            out.append(float("inf"))
            continue
        sym = len(prev ^ cur)
        out.append(sym / math.sqrt(len(prev) * len(cur)))
    return out


@dataclass(frozen=True)
class CandidateSet:
    """Times whose distance reaches the median, largest distance first."""

    entries: tuple[tuple[int, float], ...]
    median: float

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(t for t, _ in self.entries)


def screen(distances: Sequence[float]) -> CandidateSet:
    """Keep t with d_t >= median(d_2..d_T); sort by d_t descending, ties by t."""
    d = np.asarray(list(distances), dtype=float)
    if d.size == 0:
        raise ValueError("need at least one distance")
    med = float(np.median(d))
    entries = [(i + 2, float(v)) for i, v in enumerate(d) if v >= med]
    entries.sort(key=lambda e: (-e[1], e[0]))
    return CandidateSet(tuple(entries), med)


class TraceEntry(NamedTuple):
    """One search action; ``t=0`` marks whole-set actions (fallback)."""

    action: str
    t: int
    mdl_before: float
    mdl_after: float


@dataclass(frozen=True)
class DetectionResult:
    change_points: tuple[int, ...]
    segmentation: Segmentation
    mdl_value: float
    trace: tuple[TraceEntry, ...]
    warnings: tuple[str, ...] = ()
    stats: dict = field(default_factory=dict)


class _SegmentCache:
    """Memoized per-segment fits keyed by (start, end_exclusive).

    Each segment gets its own seed derived from the master seed and its
    bounds, so results do not depend on evaluation order.
    """

    def __init__(self, seq, rng_seed: int, config: MdlConfig, init: str, max_cycles: int):
        self.seq = seq
        self.rng_seed = int(rng_seed)
        self.config = config
        self.init = init
        self.max_cycles = max_cycles
        self.fits: dict[tuple[int, int], tuple[CommunityAssignment, float]] = {}

    def fit(self, start: int, end: int) -> tuple[CommunityAssignment, float]:
        key = (start, end)
        got = self.fits.get(key)
        if got is None:
            seed = np.random.SeedSequence([self.rng_seed, start, end])
            got = fit_segment(
                self.seq,
                SegmentView(start, end),
                seed,
                config=self.config,
                init=self.init,
                max_cycles=self.max_cycles,
            )
            self.fits[key] = got
        return got

    def total(self, tau_sorted: list[int]) -> float:
        """Full criterion for the given change points, fitting as needed."""
        T = self.seq.T
        M = len(tau_sorted)
        bounds = [1] + list(tau_sorted) + [T + 1]
        val = math.log2(M + 1)
        if self.config.changepoint_code == "bound":
            val += M * math.log2(T)
        for a, b in zip(bounds[:-1], bounds[1:]):
            if self.config.changepoint_code == "lengths":
                val += math.log2(b - a + 1)
            val += self.fit(a, b)[1]
        return val


def _assemble(seq, tau: list[int], cache: _SegmentCache, config: MdlConfig) -> Segmentation:
    segs = segment_bounds(tau, seq.T)
    assignments = tuple(cache.fit(s.start, s.end_exclusive)[0] for s in segs)
    bare = Segmentation(tuple(tau), assignments, None)
    return Segmentation(tuple(tau), assignments, mle_probs_for(seq, bare, config))


def fit_segmentation(
    seq: GraphSequence,
    change_points: Sequence[int],
    rng_seed: int,
    *,
    config: MdlConfig = MdlConfig(),
    init: str = "spectral",
    max_cycles: int = 10,
) -> tuple[Segmentation, float]:
    """Fit communities with the change points held fixed (no search)."""
    tau = sorted(int(t) for t in change_points)
    segment_bounds(tau, seq.T)  # validates
    cache = _SegmentCache(seq, rng_seed, config, init, max_cycles)
    segmentation = _assemble(seq, tau, cache, config)
    return segmentation, full_mdl(seq, segmentation, config)


def detect(
    seq: GraphSequence,
    rng_seed: int,
    *,
    config: MdlConfig = MdlConfig(),
    init: str = "spectral",
    max_cycles: int = 10,
) -> DetectionResult:
    """Joint change-point and community search.

    Deterministic under a fixed seed.  The result's criterion value never
    exceeds the unsegmented fit's.
    """
    T = seq.T
    cache = _SegmentCache(seq, rng_seed, config, init, max_cycles)
    stats = {"candidate_evals": 0, "merge_evals": 0}
    trace: list[TraceEntry] = []
    warnings_: list[str] = []

    mdl_empty = cache.total([])
    mdl_old = mdl_empty
    tau_order: list[int] = []
    fallback_used = False

    if T >= 2:
        dists = consecutive_distances(seq, zero_edges="inf")
        for off, v in enumerate(dists):
            if math.isinf(v):
                warnings_.append(
                    f"zero-edge snapshot at the boundary t={off + 2}; distance set to inf"
                )
        cand_list = list(screen(dists).times)

        i = 0
        while i < len(cand_list):
            t = cand_list[i]
            mdl_new = cache.total(sorted(tau_order + [t]))
            stats["candidate_evals"] += 1
            if mdl_new < mdl_old:
                trace.append(TraceEntry("add", t, mdl_old, mdl_new))
                tau_order.append(t)
                cand_list.remove(t)
                mdl_old = mdl_new
                i = 0
            else:
                trace.append(TraceEntry("add_rejected", t, mdl_old, mdl_new))
                i += 1

        if not tau_order:
            # adopt every remaining candidate, least suspicious first,
            # and let the merge pass prune
            tau_order = list(reversed(cand_list))
            mdl_new = cache.total(sorted(tau_order))
            trace.append(TraceEntry("fallback", 0, mdl_old, mdl_new))
            mdl_old = mdl_new
            fallback_used = True
        else:
            tau_order = list(reversed(tau_order))

        i = 0
        while i < len(tau_order):
            t = tau_order[i]
            mdl_new = cache.total(sorted(x for x in tau_order if x != t))
            stats["merge_evals"] += 1
            if mdl_new < mdl_old:
                trace.append(TraceEntry("merge", t, mdl_old, mdl_new))
                tau_order.remove(t)
                mdl_old = mdl_new
                i = 0
            else:
                trace.append(TraceEntry("merge_rejected", t, mdl_old, mdl_new))
                i += 1

    if fallback_used and tau_order and mdl_old >= mdl_empty:
        # the fallback adopted points without ever beating the unsegmented
        # fit; never return a worse model than no change points at all
        trace.append(TraceEntry("fallback_reverted", 0, mdl_old, mdl_empty))
        tau_order = []
        mdl_old = mdl_empty

    tau_final = sorted(tau_order)
    segmentation = _assemble(seq, tau_final, cache, config)
    mdl_value = full_mdl(seq, segmentation, config)
    if not math.isclose(mdl_value, mdl_old, rel_tol=1e-6, abs_tol=1e-6):
        raise InternalInvariantError(
            f"search value {mdl_old} disagrees with recomputed criterion {mdl_value}"
        )
    stats["segment_fits"] = len(cache.fits)
    return DetectionResult(
        change_points=tuple(tau_final),
        segmentation=segmentation,
        mdl_value=mdl_value,
        trace=tuple(trace),
        warnings=tuple(warnings_),
        stats=stats,
    )
