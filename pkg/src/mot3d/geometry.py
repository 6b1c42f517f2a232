"""Ground-plane geometry: upright 3D boxes, rigid poses, rotated-rectangle IoU.

Boxes are axis-positioned by their 3D center and carry a heading angle around
the vertical axis. Overlap is computed on the ground plane (z is ignored) by
clipping one rotated rectangle against the other and measuring the remaining
polygon area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import FrameMismatchError

TWO_PI = 2.0 * math.pi

# Rotation matrices are accepted as orthonormal up to this tolerance.
ORTHONORMAL_TOL = 1e-9


class Frame(Enum):
    """Coordinate frame a geometric object is expressed in."""

    LIDAR = "lidar"
    WORLD = "world"


def normalize_yaw(yaw: float) -> float:
    """Wrap an angle to the interval (-pi, pi]."""
    y = math.remainder(yaw, TWO_PI)
    if y <= -math.pi:
        y += TWO_PI
    return y


@dataclass(frozen=True)
class Box3D:
    """Upright 3D bounding box.

    ``cx, cy, cz`` locate the box center; ``length`` runs along the heading
    direction, ``width`` across it, ``height`` along the vertical axis.
    ``yaw`` is the heading around vertical, stored normalized to (-pi, pi].
    """

    cx: float
    cy: float
    cz: float
    length: float
    width: float
    height: float
    yaw: float
    frame_tag: Frame = Frame.LIDAR

    def __post_init__(self) -> None:
        if not (self.length > 0.0 and self.width > 0.0 and self.height > 0.0):
            raise ValueError(
                "box dimensions must be positive, got "
                f"({self.length}, {self.width}, {self.height})"
            )
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    @property
    def center_xy(self) -> np.ndarray:
        return np.array([self.cx, self.cy])

    def bev_area(self) -> float:
        return self.length * self.width

    def bev_corners(self) -> list[tuple[float, float]]:
        """Ground-plane corners in counter-clockwise order."""
        c = math.cos(self.yaw)
        s = math.sin(self.yaw)
        hl = 0.5 * self.length
        hw = 0.5 * self.width
        out = []
        for dx, dy in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)):
            out.append((self.cx + c * dx - s * dy, self.cy + s * dx + c * dy))
        return out


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform mapping LiDAR coordinates into the world frame.

    ``x_world = rotation @ x_lidar + translation``. The rotation must be a
    proper orthonormal matrix (det +1) within ``ORTHONORMAL_TOL``.
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        r = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        if float(np.max(np.abs(r.T @ r - np.eye(3)))) > ORTHONORMAL_TOL:
            raise ValueError("pose rotation is not orthonormal")
        if abs(float(np.linalg.det(r)) - 1.0) > 1e-6:
            raise ValueError("pose rotation must be proper (det = +1)")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt, -rt @ self.translation)

    @property
    def heading(self) -> float:
        """Ground-plane heading angle of the rotation."""
        return math.atan2(self.rotation[1, 0], self.rotation[0, 0])


def transform_box(box: Box3D, pose: Pose) -> Box3D:
    """Map a LiDAR-frame box into the world frame.

    The center is rigidly transformed, the heading is advanced by the pose
    heading, and the dimensions are unchanged.
    """
    if box.frame_tag is not Frame.LIDAR:
        raise FrameMismatchError("transform_box expects a LiDAR-frame box")
    center = pose.rotation @ np.array([box.cx, box.cy, box.cz]) + pose.translation
    return Box3D(
        cx=float(center[0]),
        cy=float(center[1]),
        cz=float(center[2]),
        length=box.length,
        width=box.width,
        height=box.height,
        yaw=box.yaw + pose.heading,
        frame_tag=Frame.WORLD,
    )


def _clip_polygon(
    subject: list[tuple[float, float]], clip: list[tuple[float, float]]
) -> list[tuple[float, float]]:
    """Clip a convex polygon by another convex polygon (counter-clockwise).

    Classic edge-by-edge clipping: each clip edge discards the subject
    vertices on its outer side and inserts the edge crossings.
    """
    output = subject
    n = len(clip)
    for i in range(n):
        if not output:
            return []
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        inputs = output
        output = []
        px, py = inputs[-1]
        # cross >= 0 keeps points lying exactly on the clip edge
        p_in = ex * (py - ay) - ey * (px - ax) >= 0.0
        for qx, qy in inputs:
            q_in = ex * (qy - ay) - ey * (qx - ax) >= 0.0
            if q_in != p_in:
                # segment crosses the clip line; insert the intersection
                dx, dy = qx - px, qy - py
                den = ex * dy - ey * dx
                if den != 0.0:
                    t = (ex * (ay - py) - ey * (ax - px)) / den
                    output.append((px + t * dx, py + t * dy))
            if q_in:
                output.append((qx, qy))
            px, py, p_in = qx, qy, q_in
    return output


def _polygon_area(poly: list[tuple[float, float]]) -> float:
    """Shoelace area of a simple polygon."""
    n = len(poly)
    if n < 3:
        return 0.0
    acc = 0.0
    x0, y0 = poly[-1]
    for x1, y1 in poly:
        acc += x0 * y1 - x1 * y0
        x0, y0 = x1, y1
    return 0.5 * abs(acc)


def bev_iou(a: Box3D, b: Box3D) -> float:
    """Ground-plane IoU of two boxes as rotated rectangles.

    Both boxes must live in the same coordinate frame. The vertical extent is
    ignored. The result is clamped to [0, 1].
    """
    if a.frame_tag is not b.frame_tag:
        raise FrameMismatchError(
            f"boxes live in different frames: {a.frame_tag} vs {b.frame_tag}"
        )
    inter = _polygon_area(_clip_polygon(a.bev_corners(), b.bev_corners()))
    if inter <= 0.0:
        return 0.0
    union = a.bev_area() + b.bev_area() - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, inter / union)
