"""Score-and-proximity intake gate for detections.

A detection survives the gate when its score clears the unconditional
admission threshold, or when a weaker score is vouched for by spatial
proximity to an already-confirmed trajectory. Scores at or below the hard
floor never pass. Worst case cost is O(detections x confirmed trajectories).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .kitti_io import Detection3D


@dataclass(frozen=True)
class GateConfig:
    alpha_conf: float  # hard score floor; at or below never passes
    alpha_nconf: float  # unconditional admission threshold
    sigma: float  # proximity radius (meters) for the rescue branch

    def __post_init__(self) -> None:
        if self.alpha_conf > self.alpha_nconf:
            raise ValueError("alpha_conf must not exceed alpha_nconf")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")


class GatedDetection(NamedTuple):
    detection: Detection3D
    confirmed: bool  # True iff admitted through the proximity branch


def filter_detections(
    detections: Sequence[Detection3D],
    confirmed_positions: Sequence[tuple[float, float]],
    cfg: GateConfig,
) -> list[GatedDetection]:
    """Apply the intake gate, preserving input order.

    ``confirmed_positions`` are the current ground-plane position estimates of
    confirmed trajectories.
    """
    out: list[GatedDetection] = []
    for det in detections:
        score = det.score
        if score <= cfg.alpha_conf:
            continue
        confirmed = False
        if score < cfg.alpha_nconf:
            bx = det.box.cx
            by = det.box.cy
            for px, py in confirmed_positions:
                if math.hypot(px - bx, py - by) <= cfg.sigma:
                    confirmed = True
                    break
        if confirmed or score >= cfg.alpha_nconf:
            out.append(GatedDetection(det, confirmed))
    return out
