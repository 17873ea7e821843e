"""Sequence-alignment retrieval engine for visual place recognition."""

from .model import (
    ALIGN_MODES,
    AlignConfig,
    AlignmentResult,
    ConfigError,
    FeatureSequence,
    ShapeMismatchError,
    Trajectory,
    WarpingPath,
    point_distance,
)
from .spatial import (
    AdaptiveWeight,
    adaptive_weight,
    align,
    band_mask,
    build_distance_matrix,
    pairwise_image_distances,
)
from .temporal import (
    RetrievalConfig,
    RetrievalStats,
    SequenceMatch,
    locate_subsequence,
    match_window,
    search,
    search_distance_matrix,
)
from .projection import (
    ProjectionSpec,
    project_features,
    project_sequence,
    project_trajectory,
    projection_matrix,
)
from .synthesis import SynthSpec, generate
from .evaluation import (
    EvalProtocol,
    PRCurve,
    Prediction,
    compensate_boundaries,
    evaluate,
    f1_sweep,
    judge,
    run_pipeline,
)
from .bundle import (
    BundleFormatError,
    ChecksumError,
    FeatureBundle,
    SeedMismatchError,
    read_bundle,
    read_ground_truth,
    write_bundle,
    write_ground_truth,
)

__version__ = "0.1.0"
