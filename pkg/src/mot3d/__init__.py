"""3D multi-object tracking by detection.

Kalman-filtered trajectories over gated detections, with a calibrated
detector localization covariance folded into the filter update and an
online validity score that separates real objects from ghost tracks.
"""

from .association import AssignmentResult, associate
from .bench import BenchReport, run_bench
from .config import (
    DETECTOR_PRESETS,
    FilterSettings,
    TrackerConfig,
    load_config,
    preset,
    save_config,
)
from .errors import (
    CalibrationError,
    EvaluationError,
    FrameMismatchError,
    Mot3dError,
    ParseError,
    ScenarioError,
    SequencingError,
    UpdateError,
)
from .gate import GateConfig, GatedDetection, filter_detections
from .geometry import Box3D, Frame, Pose, bev_iou, normalize_yaw, transform_box
from .kalman import (
    FilterParams,
    FilterState,
    init_state,
    make_filter_params,
    predict,
    update,
)
from .kitti_io import (
    Detection3D,
    LabeledTrack,
    ResultRow,
    read_detections,
    read_labels,
    read_poses,
    read_results,
    write_detections,
    write_labels,
    write_poses,
    write_results,
)
from .metrics import MetricsReport, evaluate
from .noise import (
    DeviationStats,
    NoiseModel,
    build_noise_covariance,
    fit_deviation_stats,
    load_noise_model,
    match_detections_to_gt,
    save_noise_model,
)
from .simulate import ScenarioSpec, generate, get_scenario, scenario_library
from .tracker import (
    FrameResult,
    RunSummary,
    TrackEntry,
    Tracker,
    run_by_class,
    run_offline,
)
from .validity import CertaintyState, ValidityConfig, init_certainty, update_certainty

__version__ = "0.1.0"

__all__ = [
    "AssignmentResult",
    "BenchReport",
    "Box3D",
    "CalibrationError",
    "CertaintyState",
    "DETECTOR_PRESETS",
    "Detection3D",
    "DeviationStats",
    "EvaluationError",
    "FilterParams",
    "FilterSettings",
    "FilterState",
    "Frame",
    "FrameMismatchError",
    "FrameResult",
    "GateConfig",
    "GatedDetection",
    "LabeledTrack",
    "MetricsReport",
    "Mot3dError",
    "NoiseModel",
    "ParseError",
    "Pose",
    "ResultRow",
    "RunSummary",
    "ScenarioError",
    "ScenarioSpec",
    "SequencingError",
    "TrackEntry",
    "Tracker",
    "TrackerConfig",
    "UpdateError",
    "ValidityConfig",
    "associate",
    "bev_iou",
    "build_noise_covariance",
    "evaluate",
    "filter_detections",
    "fit_deviation_stats",
    "generate",
    "get_scenario",
    "init_certainty",
    "init_state",
    "load_config",
    "load_noise_model",
    "make_filter_params",
    "match_detections_to_gt",
    "normalize_yaw",
    "predict",
    "preset",
    "read_detections",
    "read_labels",
    "read_poses",
    "read_results",
    "run_bench",
    "run_by_class",
    "run_offline",
    "save_config",
    "save_noise_model",
    "scenario_library",
    "transform_box",
    "update",
    "update_certainty",
    "write_detections",
    "write_labels",
    "write_poses",
    "write_results",
]
