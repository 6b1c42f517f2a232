"""Readers and writers for KITTI-style tracking text formats.

Three line formats are handled, all whitespace-separated:

* detections (17 fields):
  ``frame class truncated occluded alpha bb_l bb_t bb_r bb_b h w l x y z rot_y score``
* ground-truth labels (17 fields):
  ``frame track_id class truncated occluded alpha bb_l bb_t bb_r bb_b h w l x y z rot_y``
* tracking results (18 fields): the detection layout with ``track_id``
  inserted after ``frame``.

Boxes are ingested as LiDAR-frame with center-of-box semantics; pass
``z_is_bottom=True`` for data where the z coordinate anchors the box bottom.
Pose files carry one row-major 3x4 ``[R|t]`` matrix per line. Parsers raise
``ParseError`` with file and line context instead of propagating raw
exceptions, whatever the input bytes are.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ParseError
from .geometry import Box3D, Frame, Pose

log = logging.getLogger(__name__)

KNOWN_CLASSES = frozenset(
    {
        "Car",
        "Van",
        "Truck",
        "Pedestrian",
        "Person_sitting",
        "Cyclist",
        "Tram",
        "Misc",
    }
)

# Rotations parsed from pose files are cleaned up silently below this drift
# and with a warning above it.
POSE_DRIFT_WARN = 1e-6

_DET_FIELDS = 17
_LABEL_FIELDS = 17
_RESULT_FIELDS = 18


@dataclass(frozen=True)
class Detection3D:
    """One detector output: a scored LiDAR-frame box at a frame index."""

    frame: int
    class_label: str
    box: Box3D
    score: float

    def __post_init__(self) -> None:
        if self.frame < 0:
            raise ValueError("frame index must be non-negative")


@dataclass(frozen=True)
class LabeledTrack:
    """One ground-truth box with its persistent track identity."""

    frame: int
    track_id: int
    class_label: str
    box: Box3D

    def __post_init__(self) -> None:
        if self.frame < 0:
            raise ValueError("frame index must be non-negative")


class ResultRow(NamedTuple):
    track_id: int
    class_label: str
    box: Box3D
    score: float


def _read_lines(path: str | Path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid utf-8 text: {exc}") from exc
    return text.splitlines()


def _box_from_fields(
    fields: list[str], start: int, where: str, frame_tag: Frame, z_is_bottom: bool
) -> Box3D:
    """Build a box from the 7 geometry fields ``h w l x y z rot_y``."""
    try:
        h, w, l, x, y, z, rot = (float(v) for v in fields[start : start + 7])
    except ValueError as exc:
        raise ParseError(f"{where}: non-numeric box field: {exc}") from exc
    cz = z + 0.5 * h if z_is_bottom else z
    try:
        return Box3D(
            cx=x, cy=y, cz=cz, length=l, width=w, height=h, yaw=rot, frame_tag=frame_tag
        )
    except ValueError as exc:
        raise ParseError(f"{where}: invalid box: {exc}") from exc


def _parse_int(value: str, where: str, what: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ParseError(f"{where}: {what} is not an integer: {value!r}") from exc


def _parse_float(value: str, where: str, what: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise ParseError(f"{where}: {what} is not a number: {value!r}") from exc


def read_detections(
    path: str | Path,
    z_is_bottom: bool = False,
) -> dict[int, list[Detection3D]]:
    """Parse a detection file into per-frame lists (input order preserved).

    Lines with a class outside ``KNOWN_CLASSES`` are skipped with a warning.
    """
    out: dict[int, list[Detection3D]] = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        fields = line.split()
        if len(fields) != _DET_FIELDS:
            raise ParseError(
                f"{where}: expected {_DET_FIELDS} fields, got {len(fields)}"
            )
        frame = _parse_int(fields[0], where, "frame")
        label = fields[1]
        if label not in KNOWN_CLASSES:
            log.warning("%s: skipping unknown class %r", where, label)
            continue
        box = _box_from_fields(fields, 9, where, Frame.LIDAR, z_is_bottom)
        score = _parse_float(fields[16], where, "score")
        try:
            det = Detection3D(frame=frame, class_label=label, box=box, score=score)
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from exc
        out.setdefault(frame, []).append(det)
    return out


def read_labels(
    path: str | Path,
    z_is_bottom: bool = False,
    frame_tag: Frame = Frame.LIDAR,
) -> dict[int, list[LabeledTrack]]:
    """Parse a ground-truth label file into per-frame lists.

    (frame, track_id) pairs must be unique within the file.
    """
    out: dict[int, list[LabeledTrack]] = {}
    seen: set[tuple[int, int]] = set()
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        fields = line.split()
        if len(fields) != _LABEL_FIELDS:
            raise ParseError(
                f"{where}: expected {_LABEL_FIELDS} fields, got {len(fields)}"
            )
        frame = _parse_int(fields[0], where, "frame")
        track_id = _parse_int(fields[1], where, "track_id")
        label = fields[2]
        if label not in KNOWN_CLASSES:
            log.warning("%s: skipping unknown class %r", where, label)
            continue
        if (frame, track_id) in seen:
            raise ParseError(f"{where}: duplicate (frame, track_id) = ({frame}, {track_id})")
        seen.add((frame, track_id))
        box = _box_from_fields(fields, 10, where, frame_tag, z_is_bottom)
        try:
            row = LabeledTrack(frame=frame, track_id=track_id, class_label=label, box=box)
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from exc
        out.setdefault(frame, []).append(row)
    return out


def read_results(
    path: str | Path,
    frame_tag: Frame = Frame.WORLD,
) -> dict[int, list[ResultRow]]:
    """Parse a tracking result file (detection layout plus track id)."""
    out: dict[int, list[ResultRow]] = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        fields = line.split()
        if len(fields) != _RESULT_FIELDS:
            raise ParseError(
                f"{where}: expected {_RESULT_FIELDS} fields, got {len(fields)}"
            )
        frame = _parse_int(fields[0], where, "frame")
        if frame < 0:
            raise ParseError(f"{where}: frame index must be non-negative")
        track_id = _parse_int(fields[1], where, "track_id")
        label = fields[2]
        if label not in KNOWN_CLASSES:
            log.warning("%s: skipping unknown class %r", where, label)
            continue
        box = _box_from_fields(fields, 10, where, frame_tag, z_is_bottom=False)
        score = _parse_float(fields[17], where, "score")
        out.setdefault(frame, []).append(ResultRow(track_id, label, box, score))
    return out


def write_results(path: str | Path, frames: Iterable) -> None:
    """Write tracking output, sorted by (frame, track_id), 6-decimal fixed.

    ``frames`` is an iterable of FrameResult values from the tracker.
    """
    rows = []
    for fr in frames:
        for entry in fr.entries:
            rows.append((fr.frame, entry.track_id, entry.class_label, entry.box, entry.score))
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = []
    for frame, track_id, label, box, score in rows:
        lines.append(
            f"{frame} {track_id} {label} 0 0 -10 0 0 0 0 "
            f"{box.height:.6f} {box.width:.6f} {box.length:.6f} "
            f"{box.cx:.6f} {box.cy:.6f} {box.cz:.6f} {box.yaw:.6f} {score:.6f}"
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def write_detections(path: str | Path, dets_by_frame: dict[int, list[Detection3D]]) -> None:
    """Write detections in the 17-field layout, frame order, 6-decimal fixed."""
    lines = []
    for frame in sorted(dets_by_frame):
        for det in dets_by_frame[frame]:
            box = det.box
            lines.append(
                f"{frame} {det.class_label} 0 0 -10 0 0 0 0 "
                f"{box.height:.6f} {box.width:.6f} {box.length:.6f} "
                f"{box.cx:.6f} {box.cy:.6f} {box.cz:.6f} {box.yaw:.6f} {det.score:.6f}"
            )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def write_labels(path: str | Path, labels_by_frame: dict[int, list[LabeledTrack]]) -> None:
    """Write ground-truth labels in the 17-field layout with track ids."""
    lines = []
    for frame in sorted(labels_by_frame):
        for row in sorted(labels_by_frame[frame], key=lambda r: r.track_id):
            box = row.box
            lines.append(
                f"{frame} {row.track_id} {row.class_label} 0 0 -10 0 0 0 0 "
                f"{box.height:.6f} {box.width:.6f} {box.length:.6f} "
                f"{box.cx:.6f} {box.cy:.6f} {box.cz:.6f} {box.yaw:.6f}"
            )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def _orthonormalize(r: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(r)
    fixed = u @ vt
    if np.linalg.det(fixed) < 0.0:
        fixed = u @ np.diag([1.0, 1.0, -1.0]) @ vt
    return fixed


def read_poses(path: str | Path) -> list[Pose]:
    """Parse a pose file: one row-major 3x4 [R|t] per line, frame order.

    Rotations with drift from orthonormality are re-orthonormalized, with a
    warning when the drift exceeds ``POSE_DRIFT_WARN``.
    """
    poses: list[Pose] = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        fields = line.split()
        if len(fields) != 12:
            raise ParseError(f"{where}: expected 12 pose values, got {len(fields)}")
        try:
            mat = np.array([float(v) for v in fields], dtype=float).reshape(3, 4)
        except ValueError as exc:
            raise ParseError(f"{where}: non-numeric pose value: {exc}") from exc
        if not np.all(np.isfinite(mat)):
            raise ParseError(f"{where}: pose values must be finite")
        r = mat[:, :3]
        t = mat[:, 3]
        if np.linalg.det(r) < 0.0:
            raise ParseError(f"{where}: pose rotation is a reflection (det < 0)")
        drift = float(np.max(np.abs(r.T @ r - np.eye(3))))
        if drift > POSE_DRIFT_WARN:
            log.warning("%s: rotation drift %.3e, re-orthonormalizing", where, drift)
            r = _orthonormalize(r)
        elif drift > 1e-9:
            r = _orthonormalize(r)
        try:
            poses.append(Pose(rotation=r, translation=t))
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from exc
    return poses


def write_poses(path: str | Path, poses: Iterable[Pose]) -> None:
    """Write poses in the row-major 3x4 layout, 12 decimals."""
    lines = []
    for pose in poses:
        mat = np.hstack([pose.rotation, pose.translation.reshape(3, 1)])
        lines.append(" ".join(f"{v:.12f}" for v in mat.reshape(-1)))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_keyvalues(path: str | Path) -> dict[str, str]:
    """Parse a ``key = value`` text file; '#' starts a comment line."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        where = f"{path}:{lineno}"
        if "=" not in stripped:
            raise ParseError(f"{where}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ParseError(f"{where}: empty key")
        if key in out:
            raise ParseError(f"{where}: duplicate key {key!r}")
        out[key] = value
    return out


def write_keyvalues(
    path: str | Path, mapping: dict[str, str], header: str | None = None
) -> None:
    """Write a ``key = value`` text file in mapping order."""
    lines = [f"# {header}"] if header else []
    lines.extend(f"{k} = {v}" for k, v in mapping.items())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
