"""Command-line interface.

Subcommands:
    simulate   generate a synthetic scenario (detections, labels, poses)
    calibrate  fit a detector noise model from detections + ground truth
    track      run the tracker over a detection file
    eval       score a result file against ground-truth labels
    bench      measure single-threaded tracking throughput
    plot       render SVG charts from latency CSVs or metric reports
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from . import bench as bench_mod
from . import config as config_mod
from . import kitti_io, metrics, noise, simulate, tracker
from .errors import Mot3dError
from .geometry import Frame, transform_box


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mot3d",
        description="3D multi-object tracking with noise-aware filtering "
        "and trajectory validity scoring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic scenario")
    p_sim.add_argument("--scenario", help="scenario name (see --list)")
    p_sim.add_argument("--seed", type=int, default=None, help="RNG seed override")
    p_sim.add_argument("--out", help="output directory")
    p_sim.add_argument(
        "--list", action="store_true", help="list available scenarios and exit"
    )

    p_cal = sub.add_parser("calibrate", help="fit a detector noise model")
    p_cal.add_argument("--detections", required=True)
    p_cal.add_argument("--labels", required=True)
    p_cal.add_argument("--poses", default=None, help="optional ego pose file")
    p_cal.add_argument("--detector", default="custom", help="name stored in the model")
    p_cal.add_argument("--max-dist", type=float, default=2.0,
                       help="center distance cap for detection/GT pairing (m)")
    p_cal.add_argument("--z-is-bottom", action="store_true",
                       help="input z is the box bottom face, not the center")
    p_cal.add_argument("--out", required=True, help="noise model output file")

    p_trk = sub.add_parser("track", help="run the tracker over a sequence")
    p_trk.add_argument("--detections", required=True)
    p_trk.add_argument("--poses", required=True)
    p_trk.add_argument("--out", required=True, help="result file path")
    _add_config_flags(p_trk)
    p_trk.add_argument("--by-class", action="store_true",
                       help="run one tracker per object class")
    p_trk.add_argument("--metrics-json", default=None,
                       help="write run timing/counters as JSON")

    p_eval = sub.add_parser("eval", help="score results against labels")
    p_eval.add_argument("--results", required=True)
    p_eval.add_argument("--labels", required=True)
    p_eval.add_argument("--threshold", type=float, default=0.5,
                        help="BEV IoU match threshold")
    p_eval.add_argument("--report", default=None,
                        help="write a machine-readable key-value report")

    p_bench = sub.add_parser("bench", help="measure tracking throughput")
    p_bench.add_argument("--detections", required=True)
    p_bench.add_argument("--poses", required=True)
    _add_config_flags(p_bench)
    p_bench.add_argument("--repetitions", type=int, default=3)
    p_bench.add_argument("--report", default=None,
                         help="write the key-value report to a file")
    p_bench.add_argument("--latency-csv", default=None,
                         help="write per-frame latencies as CSV")

    p_plot = sub.add_parser("plot", help="render SVG charts")
    p_plot.add_argument("--latency-csv", default=None,
                        help="per-frame latency CSV from the bench subcommand")
    p_plot.add_argument("--metrics-kv", default=None,
                        help="key-value metrics report from the eval subcommand")
    p_plot.add_argument("--out", required=True, help="output SVG path")

    return parser


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", default=None,
                   help="detector preset: " + ", ".join(sorted(config_mod.DETECTOR_PRESETS)))
    p.add_argument("--config", default=None, help="tracker config file")
    p.add_argument("--noise-model", default=None,
                   help="noise model file from the calibrate subcommand")
    p.add_argument("--emit-unconfirmed", action="store_true",
                   help="emit tracks before they reach the validity threshold")
    p.add_argument("--disable-dt", action="store_true",
                   help="ablation: drop the detector noise covariance")
    p.add_argument("--disable-validity", action="store_true",
                   help="ablation: treat every trajectory as confirmed at birth")
    p.add_argument("--z-is-bottom", action="store_true",
                   help="input z is the box bottom face, not the center")


def _resolve_config(args: argparse.Namespace) -> config_mod.TrackerConfig:
    if args.config is not None and args.preset is not None:
        raise Mot3dError("pass either --config or --preset, not both")
    if args.config is not None:
        cfg = config_mod.load_config(args.config)
    else:
        try:
            cfg = config_mod.preset(args.preset if args.preset else "virconv")
        except KeyError as exc:
            raise Mot3dError(str(exc).strip('"')) from exc
    if args.noise_model is not None:
        cfg = cfg.with_noise_model(noise.load_noise_model(args.noise_model))
    return dataclasses.replace(
        cfg,
        emit_unconfirmed=cfg.emit_unconfirmed or args.emit_unconfirmed,
        d_enabled=cfg.d_enabled and not args.disable_dt,
        validity_enabled=cfg.validity_enabled and not args.disable_validity,
        z_is_bottom=cfg.z_is_bottom or args.z_is_bottom,
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.list:
        for name in sorted(simulate.scenario_library()):
            print(name)
        return 0
    if not args.scenario or not args.out:
        raise Mot3dError("simulate needs --scenario and --out (or --list)")
    try:
        spec = simulate.get_scenario(args.scenario, seed=args.seed)
    except KeyError as exc:
        raise Mot3dError(str(exc).strip('"').strip("'")) from exc
    labels, dets = simulate.generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kitti_io.write_detections(out / "detections.txt", dets)
    kitti_io.write_labels(out / "labels.txt", labels)
    kitti_io.write_poses(out / "poses.txt", simulate.identity_poses(spec.duration))
    n_det = sum(len(v) for v in dets.values())
    n_lab = sum(len(v) for v in labels.values())
    print(f"wrote {spec.duration} frames, {n_det} detections, "
          f"{n_lab} labeled boxes to {out}")
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    dets_by_frame = kitti_io.read_detections(args.detections, z_is_bottom=args.z_is_bottom)
    labels_by_frame = kitti_io.read_labels(args.labels, z_is_bottom=args.z_is_bottom)
    poses = kitti_io.read_poses(args.poses) if args.poses else None

    pairs = []
    for frame in sorted(set(dets_by_frame) | set(labels_by_frame)):
        det_boxes = [d.box for d in dets_by_frame.get(frame, [])]
        gt_boxes = [g.box for g in labels_by_frame.get(frame, [])]
        if poses is not None:
            if frame >= len(poses):
                raise Mot3dError(
                    f"frame {frame} has no pose (pose file has {len(poses)})"
                )
            det_boxes = [transform_box(b, poses[frame]) for b in det_boxes]
            gt_boxes = [transform_box(b, poses[frame]) for b in gt_boxes]
        pairs.extend(noise.match_detections_to_gt(det_boxes, gt_boxes, args.max_dist))

    stats = noise.fit_deviation_stats(pairs)
    model = noise.build_noise_covariance(stats, detector_name=args.detector)
    noise.save_noise_model(model, args.out)
    print(f"fitted {len(pairs)} pairs: var_x={model.var_x:.6g} "
          f"var_y={model.var_y:.6g} -> {args.out}")
    return 0


def _cmd_track(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    dets = kitti_io.read_detections(args.detections, z_is_bottom=cfg.z_is_bottom)
    poses = kitti_io.read_poses(args.poses)
    if args.by_class:
        frames, summary = tracker.run_by_class(dets, poses, cfg)
    else:
        frames, summary = tracker.run_offline(dets, poses, cfg)
    kitti_io.write_results(args.out, frames)
    print(f"frames={summary.frames} born={summary.born} pruned={summary.pruned} "
          f"confirmed={summary.confirmed} fps={summary.fps:.1f}")
    if args.metrics_json:
        with open(args.metrics_json, "w", encoding="utf-8") as fh:
            json.dump(dataclasses.asdict(summary), fh, indent=2)
            fh.write("\n")
    return 0


def _frame_table(by_frame: dict[int, list], num_frames: int, id_of, box_of):
    out = []
    for frame in range(num_frames):
        out.append([(id_of(r), box_of(r)) for r in by_frame.get(frame, [])])
    return out


def _cmd_eval(args: argparse.Namespace) -> int:
    results = kitti_io.read_results(args.results, frame_tag=Frame.WORLD)
    labels = kitti_io.read_labels(args.labels, frame_tag=Frame.WORLD)
    frames = 0
    if results:
        frames = max(frames, max(results) + 1)
    if labels:
        frames = max(frames, max(labels) + 1)
    preds = _frame_table(results, frames, lambda r: r.track_id, lambda r: r.box)
    gts = _frame_table(labels, frames, lambda r: r.track_id, lambda r: r.box)
    report = metrics.evaluate(preds, gts, match_threshold=args.threshold)

    print(f"{'metric':<18}{'value':>12}")
    for key, value in report.as_dict().items():
        if isinstance(value, float):
            print(f"{key:<18}{value:>12.4f}")
        else:
            print(f"{key:<18}{value:>12}")
    if args.report:
        kitti_io.write_keyvalues(
            args.report, {k: repr(v) for k, v in report.as_dict().items()}
        )
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    t0 = time.perf_counter()
    dets = kitti_io.read_detections(args.detections, z_is_bottom=cfg.z_is_bottom)
    poses = kitti_io.read_poses(args.poses)
    io_s = time.perf_counter() - t0

    report = bench_mod.run_bench(
        dets, poses, cfg, repetitions=args.repetitions, io_time_s=io_s
    )
    for key, value in report.as_dict().items():
        print(f"{key} = {value:.4f}" if isinstance(value, float) else f"{key} = {value}")
    if args.report:
        kitti_io.write_keyvalues(
            args.report, {k: repr(v) for k, v in report.as_dict().items()}
        )
    if args.latency_csv:
        bench_mod.write_latency_csv(args.latency_csv, report)
    return 0


def _cmd_plot(args: argparse.Namespace) -> int:
    if args.latency_csv is None and args.metrics_kv is None:
        raise Mot3dError("plot needs --latency-csv and/or --metrics-kv")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    panels = sum(x is not None for x in (args.latency_csv, args.metrics_kv))
    fig, axes = plt.subplots(1, panels, figsize=(6.4 * panels, 4.2))
    if panels == 1:
        axes = [axes]
    idx = 0
    if args.latency_csv is not None:
        lines = Path(args.latency_csv).read_text(encoding="utf-8").splitlines()
        frames, lat = [], []
        for line in lines[1:]:
            if not line.strip():
                continue
            f, us = line.split(",")
            frames.append(int(f))
            lat.append(float(us))
        axes[idx].plot(frames, lat, linewidth=0.8)
        axes[idx].set_xlabel("frame")
        axes[idx].set_ylabel("step latency (us)")
        axes[idx].set_title("per-frame tracking latency")
        idx += 1
    if args.metrics_kv is not None:
        kv = kitti_io.read_keyvalues(args.metrics_kv)
        keys = [k for k in ("mota", "hota_simplified", "deta", "assa") if k in kv]
        vals = [float(kv[k]) for k in keys]
        axes[idx].bar(keys, vals)
        axes[idx].set_ylim(0.0, 1.05)
        axes[idx].set_ylabel("score")
        axes[idx].set_title("tracking metrics")
    fig.tight_layout()
    fig.savefig(args.out, format="svg")
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "calibrate": _cmd_calibrate,
    "track": _cmd_track,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
    "plot": _cmd_plot,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Mot3dError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
