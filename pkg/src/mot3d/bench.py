"""Single-threaded throughput measurement for the tracker.

The timed region covers only per-frame tracker steps; parsing and file I/O
stay outside and are reported separately. The run repeats at least three
times and reports the median repetition, with mean per-stage latencies taken
from that repetition's stage recorder. Instrumentation does not change
tracking output.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from .config import TrackerConfig
from .geometry import Pose
from .kitti_io import Detection3D
from .tracker import STAGES, StageRecorder, Tracker


@dataclass(frozen=True)
class BenchReport:
    frames: int
    wall_time_s: float
    fps: float
    stage_mean_us: dict[str, float]
    per_frame_us: tuple[float, ...]
    io_time_s: float
    repetitions: int
    threads: int = 1

    def as_dict(self) -> dict[str, float | int]:
        out: dict[str, float | int] = {
            "frames": self.frames,
            "wall_time_s": self.wall_time_s,
            "fps": self.fps,
            "io_time_s": self.io_time_s,
            "repetitions": self.repetitions,
            "threads": self.threads,
        }
        for stage in STAGES:
            out[f"stage_{stage}_mean_us"] = self.stage_mean_us[stage]
        return out


def run_bench(
    dets_by_frame: dict[int, list[Detection3D]],
    poses: list[Pose],
    config: TrackerConfig,
    repetitions: int = 3,
    io_time_s: float = 0.0,
) -> BenchReport:
    """Measure tracker throughput over the sequence, median of repetitions."""
    if repetitions < 3:
        raise ValueError("need at least 3 repetitions for a stable median")
    num_frames = len(poses)
    if num_frames == 0:
        return BenchReport(
            frames=0,
            wall_time_s=0.0,
            fps=0.0,
            stage_mean_us={stage: 0.0 for stage in STAGES},
            per_frame_us=(),
            io_time_s=io_time_s,
            repetitions=repetitions,
        )

    runs: list[tuple[float, tuple[float, ...], StageRecorder]] = []
    for _ in range(repetitions):
        recorder = StageRecorder()
        tracker = Tracker(config, stage_recorder=recorder)
        frame_ns: list[int] = []
        for frame in range(num_frames):
            dets = dets_by_frame.get(frame, [])
            t0 = time.perf_counter_ns()
            tracker.step(frame, dets, poses[frame])
            frame_ns.append(time.perf_counter_ns() - t0)
        wall = sum(frame_ns) / 1e9
        runs.append((wall, tuple(ns / 1000.0 for ns in frame_ns), recorder))

    runs.sort(key=lambda r: r[0])
    wall, per_frame_us, recorder = runs[len(runs) // 2]
    if repetitions % 2 == 0:
        # even count: take the lower median so the report maps to a real run
        wall, per_frame_us, recorder = runs[repetitions // 2 - 1]
    return BenchReport(
        frames=num_frames,
        wall_time_s=wall,
        fps=num_frames / wall if wall > 0.0 else 0.0,
        stage_mean_us=recorder.mean_us(),
        per_frame_us=per_frame_us,
        io_time_s=io_time_s,
        repetitions=repetitions,
    )


def write_latency_csv(path: str, report: BenchReport) -> None:
    """Per-frame latency table consumed by the plot subcommand."""
    lines = ["frame,total_us"]
    for i, us in enumerate(report.per_frame_us):
        lines.append(f"{i},{us:.3f}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def median_wall_time(walls: list[float]) -> float:
    return statistics.median(walls)
