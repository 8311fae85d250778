"""Partition agreement scores and detection summaries.

NMI uses natural logs (the base cancels in the ratio) with the 0*log0
convention.  Degenerate cases: two single-community partitions agree
perfectly (1.0); exactly one trivial partition carries no information
about the other (0.0).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .changepoint import DetectionResult
from .errors import EmptyDomainError, SegmentMismatchError
from .graphs import GraphSequence
from .mdl import Segmentation
from .sbm import CommunityAssignment
from .synth import GroundTruth


def _as_mapping(part) -> Mapping:
    if isinstance(part, CommunityAssignment):
        return part.assignment
    return part


def _entropy(sizes: Iterable[int], total: int) -> float:
    h = 0.0
    for s in sizes:
        if s > 0:
            p = s / total
            h -= p * math.log(p)
    return h


def nmi(est, truth) -> float:
    """Normalized mutual information between two partitions, in [0, 1].

    Accepts :class:`CommunityAssignment` or plain node->group mappings.
    Nodes outside the common domain are dropped.
    """
    a = _as_mapping(est)
    b = _as_mapping(truth)
    common = set(a) & set(b)
    n = len(common)
    if n == 0:
        raise EmptyDomainError("partitions share no nodes")
    ca = Counter(a[v] for v in common)
    cb = Counter(b[v] for v in common)
    ha = _entropy(ca.values(), n)
    hb = _entropy(cb.values(), n)
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    joint = Counter((a[v], b[v]) for v in common)
    info = 0.0
    for (ka, kb), cnt in joint.items():
        info += (cnt / n) * math.log(n * cnt / (ca[ka] * cb[kb]))
    value = info / ((ha + hb) / 2.0)
    # clamp float noise at the boundaries
    return min(1.0, max(0.0, value))


@dataclass(frozen=True)
class NmiReport:
    """Per-segment NMI values, their mean, and the scored domain fraction."""

    per_segment: tuple[float, ...]
    overall: float
    coverage: tuple[float, ...]


def overall_nmi(seq: GraphSequence, est: Segmentation, truth: GroundTruth) -> NmiReport:
    """Mean per-segment NMI; requires identical change points.

    Estimated assignments are index-keyed, truth is label-keyed; nodes are
    matched by label and each segment's coverage reports how much of the
    combined domain was scored.
    """
    if tuple(est.change_points) != tuple(truth.change_points):
        raise SegmentMismatchError(
            f"estimated change points {tuple(est.change_points)} differ from "
            f"true ones {tuple(truth.change_points)}"
        )
    per = []
    cov = []
    for assign, true_map in zip(est.assignments, truth.segment_assignments):
        est_map = {seq.label_of(i): cid for i, cid in assign.assignment.items()}
        union = set(est_map) | set(true_map)
        inter = set(est_map) & set(true_map)
        cov.append(len(inter) / len(union) if union else 1.0)
        per.append(nmi(est_map, true_map))
    overall = sum(per) / len(per) if per else 1.0
    return NmiReport(tuple(per), overall, tuple(cov))


def changepoint_frequency(results: Sequence, T: int) -> dict[int, int]:
    """Histogram of detected change points over trials, for t = 2..T."""
    counts = {t: 0 for t in range(2, T + 1)}
    for r in results:
        points = r.change_points if isinstance(r, DetectionResult) else r
        for t in points:
            if t not in counts:
                raise ValueError(f"change point t={t} outside [2, {T}]")
            counts[t] += 1
    return counts
