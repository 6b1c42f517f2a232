"""Detector localization-noise calibration.

Detections are paired one-to-one with ground-truth boxes by center distance,
the ground-plane deviations are pooled over all objects and frames, and their
per-axis population statistics become a diagonal noise covariance the filter
adds to its innovation. Only the variances enter the covariance; the mean
deviation is computed for reporting but intentionally discarded.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CalibrationError, FrameMismatchError, ParseError
from .geometry import Box3D
from .kitti_io import read_keyvalues, write_keyvalues


@dataclass(frozen=True)
class DeviationStats:
    """Pooled per-axis statistics of (ground truth - detection) deviations."""

    mu_x: float
    mu_y: float
    var_x: float
    var_y: float
    n_pairs: int


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Diagonal ground-plane localization covariance for one detector."""

    d_matrix: np.ndarray  # (2, 2) diagonal
    detector_name: str = "custom"

    def __post_init__(self) -> None:
        m = np.array(self.d_matrix, dtype=float).reshape(2, 2)
        if m[0, 1] != 0.0 or m[1, 0] != 0.0:
            raise ValueError("d_matrix must be diagonal")
        if not (m[0, 0] > 0.0 and m[1, 1] > 0.0):
            raise ValueError("d_matrix diagonal must be positive")
        object.__setattr__(self, "d_matrix", m)

    @property
    def var_x(self) -> float:
        return float(self.d_matrix[0, 0])

    @property
    def var_y(self) -> float:
        return float(self.d_matrix[1, 1])


def match_detections_to_gt(
    dets: Sequence[Box3D],
    gts: Sequence[Box3D],
    max_center_dist: float,
) -> list[tuple[Box3D, Box3D]]:
    """Pair detections with ground-truth boxes, one-to-one, per frame.

    A minimum-cost assignment on ground-plane center distance is computed and
    pairs farther apart than ``max_center_dist`` are dropped. Pairs come back
    ordered by detection index.
    """
    if not max_center_dist > 0.0:
        raise ValueError("max_center_dist must be positive")
    tags = {b.frame_tag for b in dets} | {b.frame_tag for b in gts}
    if len(tags) > 1:
        raise FrameMismatchError("all boxes must share one coordinate frame")
    if not dets or not gts:
        return []
    dpos = np.array([[b.cx, b.cy] for b in dets])
    gpos = np.array([[b.cx, b.cy] for b in gts])
    diff = dpos[:, None, :] - gpos[None, :, :]
    cost = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    rows, cols = linear_sum_assignment(cost)
    pairs = [
        (dets[r], gts[c])
        for r, c in sorted(zip(rows, cols))
        if cost[r, c] <= max_center_dist
    ]
    return pairs


def fit_deviation_stats(pairs: Sequence[tuple[Box3D, Box3D]]) -> DeviationStats:
    """Population mean and variance of per-axis deviations over all pairs."""
    if len(pairs) < 2:
        raise CalibrationError(f"need at least 2 pairs to fit, got {len(pairs)}")
    dx = np.array([gt.cx - det.cx for det, gt in pairs])
    dy = np.array([gt.cy - det.cy for det, gt in pairs])
    mu_x = float(dx.mean())
    mu_y = float(dy.mean())
    return DeviationStats(
        mu_x=mu_x,
        mu_y=mu_y,
        var_x=float(np.mean((dx - mu_x) ** 2)),
        var_y=float(np.mean((dy - mu_y) ** 2)),
        n_pairs=len(pairs),
    )


def build_noise_covariance(
    stats: DeviationStats, detector_name: str = "custom"
) -> NoiseModel:
    """Turn fitted deviation statistics into the diagonal noise covariance."""
    if not (stats.var_x > 0.0 and stats.var_y > 0.0):
        raise CalibrationError(
            f"degenerate variances ({stats.var_x}, {stats.var_y}); "
            "detections are identical to ground truth or collapsed"
        )
    return NoiseModel(
        d_matrix=np.diag([stats.var_x, stats.var_y]),
        detector_name=detector_name,
    )


def save_noise_model(model: NoiseModel, path: str | Path) -> None:
    write_keyvalues(
        path,
        {
            "detector": model.detector_name,
            "var_x": repr(model.var_x),
            "var_y": repr(model.var_y),
        },
        header="fitted detector localization noise",
    )


def load_noise_model(path: str | Path) -> NoiseModel:
    kv = read_keyvalues(path)
    try:
        name = kv["detector"]
        var_x = float(kv["var_x"])
        var_y = float(kv["var_y"])
    except KeyError as exc:
        raise ParseError(f"{path}: missing noise-model key {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"{path}: bad noise-model value: {exc}") from exc
    try:
        return NoiseModel(d_matrix=np.diag([var_x, var_y]), detector_name=name)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
