"""Euler characteristic transforms for voxel volumes.

Binary volumes become cubical complexes; directional height filtrations
yield integer Euler curves; squared L2 gaps between curve matrices feed
a differentiable-in-spirit segmentation loss and a verification suite
for the combinatorial bounds the loss relies on.
"""
from ._rng import SplitMix64, mix_seed
from .cubical import (
    AXIS_SUBSETS,
    CellCounts,
    Cube,
    cell_counts,
    count_incident_cubes,
    enumerate_cells,
    euler_characteristic,
)
from .ect import (
    DirectionSet,
    EctMatrix,
    EulerCurve,
    GridCurveEngine,
    compute_ect,
    ect_distance,
    ect_distance_sq,
    euler_curve,
    resolve_threads,
    sample_directions,
    vertex_height,
)
from .loss import (
    LossConfig,
    LossReport,
    dice_loss,
    select_thresholds,
    topo_loss,
    total_loss,
)
from .metrics import (
    MetricsReport,
    UndefinedMetricError,
    evaluate,
    iou_error,
    surface_error,
    surface_voxel_count,
    volume_error,
)
from .verify import (
    StabilityReport,
    StabilityTrial,
    check_cube_count_bound,
    check_lemma1,
    effective_dim,
    measured_ec_distance,
    run_stability_suite,
    stability_bound,
)
from .volume import (
    BinaryVolume,
    GrayVolume,
    MalformedHeaderError,
    TruncatedPayloadError,
    UnsupportedDtypeError,
    VgridError,
    Volume,
    binarize,
    load_volume,
    otsu_threshold,
    save_volume,
    sorted_distinct_union,
)

__version__ = "0.1.0"

__all__ = [
    "AXIS_SUBSETS",
    "BinaryVolume",
    "CellCounts",
    "Cube",
    "DirectionSet",
    "EctMatrix",
    "EulerCurve",
    "GrayVolume",
    "GridCurveEngine",
    "LossConfig",
    "LossReport",
    "MalformedHeaderError",
    "MetricsReport",
    "SplitMix64",
    "StabilityReport",
    "StabilityTrial",
    "TruncatedPayloadError",
    "UndefinedMetricError",
    "UnsupportedDtypeError",
    "VgridError",
    "Volume",
    "binarize",
    "cell_counts",
    "check_cube_count_bound",
    "check_lemma1",
    "compute_ect",
    "count_incident_cubes",
    "dice_loss",
    "ect_distance",
    "ect_distance_sq",
    "effective_dim",
    "enumerate_cells",
    "euler_characteristic",
    "euler_curve",
    "evaluate",
    "iou_error",
    "load_volume",
    "measured_ec_distance",
    "mix_seed",
    "otsu_threshold",
    "resolve_threads",
    "run_stability_suite",
    "sample_directions",
    "save_volume",
    "select_thresholds",
    "sorted_distinct_union",
    "stability_bound",
    "surface_error",
    "surface_voxel_count",
    "topo_loss",
    "total_loss",
    "vertex_height",
    "volume_error",
]
