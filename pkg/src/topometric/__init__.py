"""Topometric localization: dead reckoning corrected by sparse place detections.

A metric pipeline integrates noisy relative motions into an SE(2) trajectory;
a topometric pipeline additionally snaps onto known map nodes when a place
detector fires, propagates the correction backward over recent poses, and
smooths the result.
"""

from .fusion import (
    CorrectionState,
    FusionConfig,
    backward_correct,
    forward_correct,
    fuse,
    smooth,
    smooth_blend,
    smoothing_blend_weight,
    tricube,
)
from .geometry import Pose2, RelativeMotion, angular_error, compose, normalize_angle, relative_between
from .metrics import DEFAULT_SUB_LENGTHS, ErrorReport, evaluate, write_report
from .odometry import Trajectory, integrate, load_trajectory, save_trajectory, vo_loss
from .simulator import (
    HEAVY_DRIFT,
    MILD_DRIFT,
    DetectorModel,
    OdometryNoiseModel,
    Scenario,
    corrupt_odometry,
    detect_nodes,
    generate_path,
    load_scenario,
    make_scenario,
    save_scenario,
)
from .topo_map import (
    NodeDetection,
    TopoMap,
    TopoNode,
    build_map,
    load_detections,
    load_map,
    save_detections,
    save_map,
)

__all__ = [
    "CorrectionState",
    "FusionConfig",
    "backward_correct",
    "forward_correct",
    "fuse",
    "smooth",
    "smooth_blend",
    "smoothing_blend_weight",
    "tricube",
    "Pose2",
    "RelativeMotion",
    "angular_error",
    "compose",
    "normalize_angle",
    "relative_between",
    "DEFAULT_SUB_LENGTHS",
    "ErrorReport",
    "evaluate",
    "write_report",
    "Trajectory",
    "integrate",
    "load_trajectory",
    "save_trajectory",
    "vo_loss",
    "HEAVY_DRIFT",
    "MILD_DRIFT",
    "DetectorModel",
    "OdometryNoiseModel",
    "Scenario",
    "corrupt_odometry",
    "detect_nodes",
    "generate_path",
    "load_scenario",
    "make_scenario",
    "save_scenario",
    "NodeDetection",
    "TopoMap",
    "TopoNode",
    "build_map",
    "load_detections",
    "load_map",
    "save_detections",
    "save_map",
]

__version__ = "0.1.0"
