"""Joint change-point and community detection in network time series.

Fits a stochastic block model per snapshot, scores candidate
segmentations by a two-part code length (model bits plus residual bits),
and searches change points and per-segment communities that minimize it.
"""

from .changepoint import (
    CandidateSet,
    DetectionResult,
    TraceEntry,
    consecutive_distances,
    detect,
    fit_segmentation,
    screen,
)
from .community import bisect_refine, detect_communities, merge_pass
from .evaluate import NmiReport, changepoint_frequency, nmi, overall_nmi
from .graphs import (
    GraphSequence,
    NodeId,
    SegmentView,
    Snapshot,
    active_nodes,
    aggregate,
    build_sequence,
    export_edge_lists,
)
from .mdl import (
    MdlConfig,
    Segmentation,
    full_mdl,
    model_code_length,
    residual_code_length,
    segment_mdl,
)
from .sbm import (
    BlockCounts,
    CommunityAssignment,
    LinkProbs,
    block_counts,
    block_log_likelihood,
    mle_link_probs,
)
from .synth import (
    FixedLaw,
    GroundTruth,
    SegmentSpec,
    SettingSpec,
    UniformLaw,
    builtin_setting,
    correlated_pair_sequence,
    generate,
)

__version__ = "0.1.0"

__all__ = [
    "BlockCounts",
    "CandidateSet",
    "CommunityAssignment",
    "DetectionResult",
    "FixedLaw",
    "GraphSequence",
    "GroundTruth",
    "LinkProbs",
    "MdlConfig",
    "NmiReport",
    "NodeId",
    "SegmentSpec",
    "SegmentView",
    "Segmentation",
    "SettingSpec",
    "Snapshot",
    "TraceEntry",
    "UniformLaw",
    "active_nodes",
    "aggregate",
    "bisect_refine",
    "block_counts",
    "block_log_likelihood",
    "build_sequence",
    "builtin_setting",
    "changepoint_frequency",
    "consecutive_distances",
    "correlated_pair_sequence",
    "detect",
    "detect_communities",
    "export_edge_lists",
    "fit_segmentation",
    "full_mdl",
    "generate",
    "merge_pass",
    "mle_link_probs",
    "model_code_length",
    "nmi",
    "overall_nmi",
    "residual_code_length",
    "screen",
    "segment_mdl",
]
