"""Online tracking pipeline.

Each frame runs fixed phases: detections are transformed into the world frame
and gated, associated against every cached trajectory, folded into the
per-trajectory filters (update for matched, then one predict for all, so every
trajectory stores a next-frame prediction for the following association),
scored by the validity mechanism, and finally pruned by position-variance
termination before the frame's boxes are emitted.

Emitted boxes answer for the current frame: a matched trajectory reports its
posterior position, a coasting trajectory reports its prediction for this
frame, both carrying the z, dimensions, and heading of the last observation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

from .association import associate
from .config import TrackerConfig
from .errors import SequencingError
from .gate import filter_detections
from .geometry import Box3D, Pose, transform_box
from .kalman import FilterState, init_state, predict, update
from .kitti_io import Detection3D
from .validity import CertaintyState, init_certainty, update_certainty

STAGES = ("gate", "associate", "filter", "validity", "prune")


class StageRecorder:
    """Collects per-frame stage latencies and the stage call order.

    Attaching a recorder never changes tracking output; it only observes.
    """

    def __init__(self) -> None:
        self.frames: list[dict[str, int]] = []
        self.order: list[str] = []

    def begin_frame(self) -> None:
        self.frames.append({})

    def add(self, stage: str, ns: int) -> None:
        self.order.append(stage)
        bucket = self.frames[-1]
        bucket[stage] = bucket.get(stage, 0) + ns

    def mean_us(self) -> dict[str, float]:
        out: dict[str, float] = {}
        if not self.frames:
            return {stage: 0.0 for stage in STAGES}
        for stage in STAGES:
            total = sum(f.get(stage, 0) for f in self.frames)
            out[stage] = total / len(self.frames) / 1000.0
        return out


@dataclass(eq=False, slots=True)
class Trajectory:
    """One tracked object and its bookkeeping.

    ``last_box`` mirrors the most recent observation with its ground-plane
    center replaced by the filter posterior, so box center and filter position
    agree after every update. ``emit_box`` is the box reported for the current
    frame.
    """

    id: int
    filter: FilterState
    certainty: CertaintyState
    last_box: Box3D
    emit_box: Box3D
    birth_frame: int
    last_update_frame: int
    class_label: str
    last_score: float


@dataclass(frozen=True)
class TrackEntry:
    track_id: int
    class_label: str
    box: Box3D
    score: float
    confirmed: bool


@dataclass(frozen=True)
class FrameResult:
    frame: int
    entries: tuple[TrackEntry, ...]


@dataclass(frozen=True)
class RunSummary:
    frames: int
    born: int
    pruned: int
    confirmed: int
    wall_time_s: float
    fps: float


def terminate_check(traj: Trajectory, cfg: TrackerConfig) -> bool:
    """True when either ground-plane position variance exceeds the threshold."""
    p = traj.filter.p_mat
    thr = cfg.sigma_est_certainty
    return bool(p[0, 0] > thr or p[1, 1] > thr)


class Tracker:
    """Stateful frame-by-frame tracker. Frames must arrive in increasing order."""

    def __init__(
        self,
        config: TrackerConfig,
        id_start: int = 0,
        stage_recorder: StageRecorder | None = None,
    ) -> None:
        self.config = config
        self._params = config.filter.build_params(use_d=config.d_enabled)
        self._trajectories: list[Trajectory] = []
        self._next_id = id_start
        self._last_frame: int | None = None
        self._recorder = stage_recorder
        self.born = 0
        self.pruned = 0
        self.confirmed = 0

    @property
    def trajectories(self) -> list[Trajectory]:
        """Live trajectories, in birth order (diagnostic view)."""
        return list(self._trajectories)

    @property
    def next_id(self) -> int:
        return self._next_id

    def step(
        self, frame_index: int, detections: list[Detection3D], pose: Pose
    ) -> FrameResult:
        if self._last_frame is not None and frame_index <= self._last_frame:
            raise SequencingError(
                f"frame {frame_index} not after frame {self._last_frame}"
            )
        self._last_frame = frame_index
        cfg = self.config
        params = self._params
        rec = self._recorder
        if rec is not None:
            rec.begin_frame()
            t_prev = time.perf_counter_ns()

        # gate: intake transform plus score/proximity filtering
        world: list[Detection3D] = []
        for det in detections:
            if det.frame != frame_index:
                raise ValueError(
                    f"detection frame {det.frame} does not match step frame {frame_index}"
                )
            world.append(replace(det, box=transform_box(det.box, pose)))
        confirmed_xy = [
            (float(t.filter.x_vec[0]), float(t.filter.x_vec[1]))
            for t in self._trajectories
            if t.certainty.confirmed
        ]
        gated = filter_detections(world, confirmed_xy, cfg.gate)
        if rec is not None:
            t_now = time.perf_counter_ns()
            rec.add("gate", t_now - t_prev)
            t_prev = t_now

        # associate against every cached trajectory
        track_pos = [
            (t.id, (float(t.filter.x_vec[0]), float(t.filter.x_vec[1])))
            for t in self._trajectories
        ]
        det_xy = [(g.detection.box.cx, g.detection.box.cy) for g in gated]
        assoc = associate(
            track_pos,
            det_xy,
            cfg.assoc_sigma,
            mask_over_sigma=cfg.assoc_mask_over_sigma,
        )
        if rec is not None:
            t_now = time.perf_counter_ns()
            rec.add("associate", t_now - t_prev)
            t_prev = t_now

        # filter: fold matched observations in, then advance everything one frame
        by_id = {t.id: t for t in self._trajectories}
        matched: list[tuple[Trajectory, float]] = []
        for tid, det_idx, _dist in assoc.matches:
            traj = by_id[tid]
            det = gated[det_idx].detection
            box = det.box
            traj.filter = update(traj.filter, (box.cx, box.cy), params)
            traj.last_box = replace(
                box, cx=float(traj.filter.x_vec[0]), cy=float(traj.filter.x_vec[1])
            )
            traj.emit_box = traj.last_box
            traj.last_score = det.score
            traj.last_update_frame = frame_index
            matched.append((traj, det.score))
        for tid in assoc.unmatched_trajectories:
            traj = by_id[tid]
            traj.emit_box = replace(
                traj.last_box,
                cx=float(traj.filter.x_vec[0]),
                cy=float(traj.filter.x_vec[1]),
            )
        newborn: list[tuple[Detection3D, FilterState]] = []
        for det_idx in assoc.unmatched_detections:
            det = gated[det_idx].detection
            state = init_state((det.box.cx, det.box.cy), params)
            newborn.append((det, predict(state, params)))
        for traj in self._trajectories:
            traj.filter = predict(traj.filter, params)
        if rec is not None:
            t_now = time.perf_counter_ns()
            rec.add("filter", t_now - t_prev)
            t_prev = t_now

        # validity: certainty bookkeeping and trajectory spawning
        vcfg = cfg.validity
        if cfg.validity_enabled:
            for traj, score in matched:
                was_confirmed = traj.certainty.confirmed
                traj.certainty = update_certainty(
                    traj.certainty, score, frame_index, vcfg
                )
                if traj.certainty.confirmed and not was_confirmed:
                    self.confirmed += 1
        else:
            for traj, _score in matched:
                traj.certainty = CertaintyState(
                    score=traj.certainty.score,
                    last_obs_frame=frame_index,
                    confirmed=True,
                )
        for det, state in newborn:
            if cfg.validity_enabled:
                cert = init_certainty(det.score, frame_index, vcfg)
            else:
                cert = CertaintyState(
                    score=max(det.score, vcfg.s_min),
                    last_obs_frame=frame_index,
                    confirmed=True,
                )
            traj = Trajectory(
                id=self._next_id,
                filter=state,
                certainty=cert,
                last_box=det.box,
                emit_box=det.box,
                birth_frame=frame_index,
                last_update_frame=frame_index,
                class_label=det.class_label,
                last_score=det.score,
            )
            self._next_id += 1
            self.born += 1
            if cert.confirmed:
                self.confirmed += 1
            self._trajectories.append(traj)
        if rec is not None:
            t_now = time.perf_counter_ns()
            rec.add("validity", t_now - t_prev)
            t_prev = t_now

        # prune: uncertainty-based termination
        survivors: list[Trajectory] = []
        for traj in self._trajectories:
            if terminate_check(traj, cfg):
                self.pruned += 1
            else:
                survivors.append(traj)
        self._trajectories = survivors
        if rec is not None:
            t_now = time.perf_counter_ns()
            rec.add("prune", t_now - t_prev)

        entries = tuple(
            TrackEntry(
                track_id=traj.id,
                class_label=traj.class_label,
                box=traj.emit_box,
                score=traj.last_score,
                confirmed=traj.certainty.confirmed,
            )
            for traj in survivors
            if traj.certainty.confirmed or cfg.emit_unconfirmed
        )
        return FrameResult(frame=frame_index, entries=entries)


def run_offline(
    dets_by_frame: dict[int, list[Detection3D]],
    poses: list[Pose],
    config: TrackerConfig,
    id_start: int = 0,
    stage_recorder: StageRecorder | None = None,
) -> tuple[list[FrameResult], RunSummary]:
    """Track a whole sequence; the pose list defines the frame count."""
    num_frames = len(poses)
    if dets_by_frame and max(dets_by_frame) >= num_frames:
        raise ValueError(
            f"detections reference frame {max(dets_by_frame)} but only "
            f"{num_frames} poses were given"
        )
    tracker = Tracker(config, id_start=id_start, stage_recorder=stage_recorder)
    results: list[FrameResult] = []
    start = time.perf_counter()
    for frame in range(num_frames):
        results.append(tracker.step(frame, dets_by_frame.get(frame, []), poses[frame]))
    wall = time.perf_counter() - start
    summary = RunSummary(
        frames=num_frames,
        born=tracker.born,
        pruned=tracker.pruned,
        confirmed=tracker.confirmed,
        wall_time_s=wall,
        fps=num_frames / wall if wall > 0.0 and num_frames else 0.0,
    )
    return results, summary


def run_by_class(
    dets_by_frame: dict[int, list[Detection3D]],
    poses: list[Pose],
    config: TrackerConfig,
) -> tuple[list[FrameResult], RunSummary]:
    """Run one tracker per object class and merge the outputs.

    Classes share one id space: each class tracker starts where the previous
    one stopped, so ids stay unique across the merged result.
    """
    labels = sorted(
        {d.class_label for dets in dets_by_frame.values() for d in dets}
    )
    if len(labels) <= 1:
        return run_offline(dets_by_frame, poses, config)

    merged: list[list[TrackEntry]] = [[] for _ in range(len(poses))]
    next_start = 0
    born = pruned = confirmed = 0
    wall = 0.0
    for label in labels:
        subset = {
            frame: [d for d in dets if d.class_label == label]
            for frame, dets in dets_by_frame.items()
        }
        subset = {frame: dets for frame, dets in subset.items() if dets}
        results, summary = run_offline(subset, poses, config, id_start=next_start)
        next_start += summary.born
        born += summary.born
        pruned += summary.pruned
        confirmed += summary.confirmed
        wall += summary.wall_time_s
        for fr in results:
            merged[fr.frame].extend(fr.entries)
    results = [
        FrameResult(frame=i, entries=tuple(sorted(es, key=lambda e: e.track_id)))
        for i, es in enumerate(merged)
    ]
    summary = RunSummary(
        frames=len(poses),
        born=born,
        pruned=pruned,
        confirmed=confirmed,
        wall_time_s=wall,
        fps=len(poses) / wall if wall > 0.0 and poses else 0.0,
    )
    return results, summary
