"""Synthetic scenario generator for tracker evaluation and stress tests.

Ground truth follows the tracker's discrete constant-acceleration recurrence
exactly (positions advance by v + a/2, velocities by a, per frame). Detections
are ground truth plus diagonal Gaussian ground-plane jitter, with optional
misses, per-agent occlusion windows during which the object stays in the
labels but produces no detections, and scheduled ghost detections that
correspond to no labeled object.

Generation is deterministic in the scenario seed: random draws happen in
frame-major order, agents (in declaration order) before ghosts, and only for
visible agents or appearing ghosts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import ScenarioError
from .geometry import Box3D, Frame, Pose
from .kitti_io import Detection3D, LabeledTrack


@dataclass(frozen=True)
class ScoreDist:
    """Clipped Gaussian detection-score distribution."""

    mean: float
    spread: float
    lo: float | None = None
    hi: float | None = None


@dataclass(frozen=True)
class AgentSpec:
    """One simulated object: initial kinematic state and visibility plan."""

    state0: tuple[float, float, float, float, float, float]  # x y vx vy ax ay
    dims: tuple[float, float, float] = (4.2, 1.8, 1.6)  # length width height
    z: float = 0.8
    spawn: int = 0
    despawn: int | None = None  # exclusive; None means scenario duration
    occlusions: tuple[tuple[int, int], ...] = ()  # [start, end) windows
    score: ScoreDist = ScoreDist(0.9, 0.03, 0.5, 1.0)


@dataclass(frozen=True)
class GhostSpec:
    """A recurring false detection: fixed location, appearance schedule."""

    position: tuple[float, float]
    frames: tuple[int, ...]
    score: ScoreDist
    dims: tuple[float, float, float] = (4.0, 1.7, 1.5)
    z: float = 0.75
    yaw: float = 0.0


@dataclass(frozen=True)
class NoiseSpec:
    jitter_var: tuple[float, float] = (0.0, 0.0)  # per-axis position variance
    miss_prob: float = 0.0


@dataclass(frozen=True)
class ScenarioSpec:
    duration: int
    agents: tuple[AgentSpec, ...]
    noise: NoiseSpec = NoiseSpec()
    ghosts: tuple[GhostSpec, ...] = ()
    seed: int = 0
    class_label: str = "Car"


def validate_spec(spec: ScenarioSpec) -> list[str]:
    """Collect every violation in a scenario definition (empty list means valid)."""
    bad: list[str] = []
    if spec.duration < 1:
        bad.append(f"duration must be >= 1, got {spec.duration}")
    if not 0.0 <= spec.noise.miss_prob < 1.0:
        bad.append(f"miss_prob must lie in [0, 1), got {spec.noise.miss_prob}")
    if spec.noise.jitter_var[0] < 0.0 or spec.noise.jitter_var[1] < 0.0:
        bad.append(f"jitter variances must be non-negative, got {spec.noise.jitter_var}")
    for i, agent in enumerate(spec.agents):
        despawn = agent.despawn if agent.despawn is not None else spec.duration
        if not all(d > 0.0 for d in agent.dims):
            bad.append(f"agent {i}: dimensions must be positive, got {agent.dims}")
        if not 0 <= agent.spawn < despawn <= spec.duration:
            bad.append(
                f"agent {i}: lifetime [{agent.spawn}, {despawn}) must nest in "
                f"[0, {spec.duration})"
            )
        for a, b in agent.occlusions:
            if not agent.spawn <= a < b <= despawn:
                bad.append(
                    f"agent {i}: occlusion window [{a}, {b}) outside lifetime "
                    f"[{agent.spawn}, {despawn})"
                )
        if agent.score.spread < 0.0:
            bad.append(f"agent {i}: score spread must be non-negative")
    for i, ghost in enumerate(spec.ghosts):
        if not all(d > 0.0 for d in ghost.dims):
            bad.append(f"ghost {i}: dimensions must be positive, got {ghost.dims}")
        for f in ghost.frames:
            if not 0 <= f < spec.duration:
                bad.append(f"ghost {i}: frame {f} outside [0, {spec.duration})")
        if ghost.score.spread < 0.0:
            bad.append(f"ghost {i}: score spread must be non-negative")
    return bad


def _check(spec: ScenarioSpec) -> None:
    bad = validate_spec(spec)
    if bad:
        raise ScenarioError("invalid scenario:\n" + "\n".join(f"- {v}" for v in bad))


def agent_states(
    spec: ScenarioSpec,
) -> list[list[tuple[int, tuple[float, float, float, float, float, float]]]]:
    """Per-agent kinematic states over their lifetimes, by exact recurrence."""
    _check(spec)
    out = []
    for agent in spec.agents:
        despawn = agent.despawn if agent.despawn is not None else spec.duration
        x, y, vx, vy, ax, ay = (float(v) for v in agent.state0)
        rows = []
        for frame in range(agent.spawn, despawn):
            rows.append((frame, (x, y, vx, vy, ax, ay)))
            x += vx + 0.5 * ax
            y += vy + 0.5 * ay
            vx += ax
            vy += ay
        out.append(rows)
    return out


def _agent_yaw(vx: float, vy: float, prev: float) -> float:
    if math.hypot(vx, vy) > 1e-9:
        return math.atan2(vy, vx)
    return prev


def _draw_score(rng: np.random.Generator, dist: ScoreDist) -> float:
    value = dist.mean + dist.spread * rng.standard_normal()
    if dist.lo is not None:
        value = max(value, dist.lo)
    if dist.hi is not None:
        value = min(value, dist.hi)
    return float(value)


def generate(
    spec: ScenarioSpec,
) -> tuple[dict[int, list[LabeledTrack]], dict[int, list[Detection3D]]]:
    """Produce per-frame ground-truth labels and detections.

    Agent track ids are their indices in the agent list. Occluded agents keep
    their labels but emit no detections; ghosts emit detections with no label.
    """
    _check(spec)
    rng = np.random.default_rng(spec.seed)
    std_x = math.sqrt(spec.noise.jitter_var[0])
    std_y = math.sqrt(spec.noise.jitter_var[1])
    miss_prob = spec.noise.miss_prob

    states = agent_states(spec)
    ghost_frames = [set(g.frames) for g in spec.ghosts]
    yaws = [0.0] * len(spec.agents)
    for i, agent in enumerate(spec.agents):
        yaws[i] = _agent_yaw(agent.state0[2], agent.state0[3], 0.0)

    labels: dict[int, list[LabeledTrack]] = {}
    dets: dict[int, list[Detection3D]] = {}
    state_by_frame: list[dict[int, tuple]] = [dict(rows) for rows in states]

    for frame in range(spec.duration):
        for idx, agent in enumerate(spec.agents):
            state = state_by_frame[idx].get(frame)
            if state is None:
                continue
            x, y, vx, vy, _ax, _ay = state
            yaws[idx] = _agent_yaw(vx, vy, yaws[idx])
            length, width, height = agent.dims
            box = Box3D(
                cx=x,
                cy=y,
                cz=agent.z,
                length=length,
                width=width,
                height=height,
                yaw=yaws[idx],
                frame_tag=Frame.LIDAR,
            )
            labels.setdefault(frame, []).append(
                LabeledTrack(
                    frame=frame, track_id=idx, class_label=spec.class_label, box=box
                )
            )
            occluded = any(a <= frame < b for a, b in agent.occlusions)
            if occluded:
                continue
            if rng.random() < miss_prob:
                continue
            jx = std_x * rng.standard_normal()
            jy = std_y * rng.standard_normal()
            score = _draw_score(rng, agent.score)
            dets.setdefault(frame, []).append(
                Detection3D(
                    frame=frame,
                    class_label=spec.class_label,
                    box=replace(box, cx=x + jx, cy=y + jy),
                    score=score,
                )
            )
        for gi, ghost in enumerate(spec.ghosts):
            if frame not in ghost_frames[gi]:
                continue
            jx = std_x * rng.standard_normal()
            jy = std_y * rng.standard_normal()
            score = _draw_score(rng, ghost.score)
            length, width, height = ghost.dims
            dets.setdefault(frame, []).append(
                Detection3D(
                    frame=frame,
                    class_label=spec.class_label,
                    box=Box3D(
                        cx=ghost.position[0] + jx,
                        cy=ghost.position[1] + jy,
                        cz=ghost.z,
                        length=length,
                        width=width,
                        height=height,
                        yaw=ghost.yaw,
                        frame_tag=Frame.LIDAR,
                    ),
                    score=score,
                )
            )
    return labels, dets


def identity_poses(n: int) -> list[Pose]:
    """Poses for a static sensor: LiDAR frame equals world frame."""
    return [Pose.identity() for _ in range(n)]


# Fitted localization variances used by the canned scenarios.
_JITTER_TIGHT = (0.017221, 0.005901)
_JITTER_LOOSE = (0.039156, 0.014357)


def _every_third_occlusions(duration: int) -> tuple[tuple[int, int], ...]:
    """Windows that leave exactly frames 0, 3, 6, ... visible."""
    return tuple((k, min(k + 2, duration)) for k in range(1, duration, 3))


def scenario_library() -> dict[str, ScenarioSpec]:
    """Canned scenarios keyed by name; override the seed with replace()."""
    parked = ScenarioSpec(
        duration=80,
        agents=tuple(
            AgentSpec(
                state0=(x, y, 0.0, 0.0, 0.0, 0.0),
                occlusions=((50, 80),),
            )
            for x, y in ((0.0, 0.0), (25.0, 0.0), (0.0, 25.0))
        ),
        noise=NoiseSpec(jitter_var=_JITTER_TIGHT),
    )
    long_occlusion = ScenarioSpec(
        duration=170,
        agents=(
            AgentSpec(
                state0=(-40.0, 3.0, 0.8, 0.0, 0.0, 0.0),
                occlusions=((60, 110),),  # one 50-frame gap
            ),
            AgentSpec(state0=(10.0, -8.0, 0.0, 0.0, 0.0, 0.0)),
        ),
        noise=NoiseSpec(jitter_var=_JITTER_TIGHT),
    )
    ghost_positions = (
        (60.0, 60.0),
        (-20.0, 15.0),
        (15.0, -20.0),
        (60.0, -20.0),
        (-20.0, 60.0),
        (75.0, 15.0),
        (15.0, 75.0),
        (-35.0, -35.0),
    )
    ghost_intermittent = ScenarioSpec(
        duration=200,
        agents=tuple(
            AgentSpec(
                state0=(x, y, 0.0, 0.0, 0.0, 0.0),
                score=ScoreDist(0.7, 0.05, 0.4, 1.0),
            )
            for x, y in ((0.0, 0.0), (30.0, 0.0), (0.0, 30.0), (30.0, 30.0))
        ),
        noise=NoiseSpec(jitter_var=_JITTER_LOOSE),
        ghosts=tuple(
            GhostSpec(
                position=pos,
                frames=tuple(range(k % 3, 200, 3)),  # strict every-3rd-frame
                score=ScoreDist(0.21, 0.05, 0.05, 0.5),
            )
            for k, pos in enumerate(ghost_positions)
        ),
    )
    distant_lowscore = ScenarioSpec(
        duration=200,
        agents=(
            AgentSpec(
                state0=(60.0, 0.0, 0.0, 0.0, 0.0, 0.0),
                score=ScoreDist(0.4, 0.0),
            ),
            AgentSpec(
                state0=(60.0, 40.0, 0.0, 0.0, 0.0, 0.0),
                score=ScoreDist(0.4, 0.0),
                occlusions=_every_third_occlusions(200),
            ),
        ),
        noise=NoiseSpec(jitter_var=(0.06, 0.03)),
    )
    noiseless = ScenarioSpec(
        duration=100,
        agents=(
            AgentSpec(state0=(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), score=ScoreDist(0.9, 0.0)),
            AgentSpec(
                state0=(-30.0, 10.0, 0.9, 0.0, 0.0, 0.0), score=ScoreDist(0.9, 0.0)
            ),
            AgentSpec(
                state0=(-40.0, -15.0, 0.5, 0.2, 0.01, 0.0),
                score=ScoreDist(0.9, 0.0),
            ),
        ),
        noise=NoiseSpec(jitter_var=(0.0, 0.0)),
    )
    calib_positions = [
        (40.0 * (i % 4), 40.0 * (i // 4)) for i in range(10)
    ]
    calibration = ScenarioSpec(
        duration=500,
        agents=tuple(
            AgentSpec(state0=(x, y, 0.0, 0.0, 0.0, 0.0)) for x, y in calib_positions
        ),
        noise=NoiseSpec(jitter_var=_JITTER_TIGHT),
    )
    throughput = ScenarioSpec(
        duration=7500,
        agents=tuple(_throughput_agent(i) for i in range(45)),
        noise=NoiseSpec(jitter_var=_JITTER_TIGHT, miss_prob=1.0 / 3.0),
    )
    return {
        "parked-jitter": parked,
        "long-occlusion": long_occlusion,
        "ghost-intermittent": ghost_intermittent,
        "distant-lowscore": distant_lowscore,
        "noiseless": noiseless,
        "calibration": calibration,
        "throughput": throughput,
    }


def _throughput_agent(i: int) -> AgentSpec:
    row, col = divmod(i, 9)
    vx = 0.2 * ((i % 3) - 1)
    vy = 0.15 * ((i % 5) - 2) / 2.0
    return AgentSpec(
        state0=(30.0 * col, 30.0 * row, vx, vy, 0.0, 0.0),
        score=ScoreDist(0.85, 0.05, 0.5, 1.0),
    )


def get_scenario(name: str, seed: int | None = None) -> ScenarioSpec:
    library = scenario_library()
    if name not in library:
        raise KeyError(f"unknown scenario {name!r}; known: {sorted(library)}")
    spec = library[name]
    return replace(spec, seed=seed) if seed is not None else spec


def stream_frames(
    items_by_frame: dict[int, list], num_frames: int
) -> Iterable[tuple[int, list]]:
    """Dense frame iteration over a sparse per-frame dict."""
    for frame in range(num_frames):
        yield frame, items_by_frame.get(frame, [])
