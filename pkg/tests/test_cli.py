"""End-to-end tests of the console entry point.

Every test drives ``mot3d.cli.main`` in-process with argv lists and checks
exit codes, stdout, and the files the subcommands produce.
"""

from __future__ import annotations

import json

import pytest

from mot3d import kitti_io, noise, simulate
from mot3d.cli import main
from mot3d.config import load_config, preset, save_config


def _run(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


@pytest.fixture()
def sim_dir(tmp_path):
    """A small simulated sequence written through the CLI itself."""
    out = tmp_path / "seq"
    rc = main(["simulate", "--scenario", "parked-jitter", "--seed", "11",
               "--out", str(out)])
    assert rc == 0
    return out


class TestSimulate:
    def test_list_prints_scenarios(self, capsys):
        rc, out, _ = _run(capsys, ["simulate", "--list"])
        assert rc == 0
        names = out.splitlines()
        assert names == sorted(simulate.scenario_library())
        for required in ("long-occlusion", "ghost-intermittent",
                         "distant-lowscore", "parked-jitter"):
            assert required in names

    def test_writes_sequence_files(self, sim_dir, capsys):
        spec = simulate.get_scenario("parked-jitter")
        dets = kitti_io.read_detections(sim_dir / "detections.txt")
        labels = kitti_io.read_labels(sim_dir / "labels.txt")
        poses = kitti_io.read_poses(sim_dir / "poses.txt")
        assert len(poses) == spec.duration
        assert max(dets) < spec.duration
        assert max(labels) < spec.duration
        assert sum(len(v) for v in dets.values()) > 0

    def test_seed_changes_output_and_is_deterministic(self, tmp_path):
        outs = []
        for name, seed in (("a", "5"), ("b", "5"), ("c", "6")):
            out = tmp_path / name
            assert main(["simulate", "--scenario", "parked-jitter",
                         "--seed", seed, "--out", str(out)]) == 0
            outs.append((out / "detections.txt").read_bytes())
        assert outs[0] == outs[1]
        assert outs[0] != outs[2]

    def test_unknown_scenario(self, capsys):
        rc, _, err = _run(capsys, ["simulate", "--scenario", "rush-hour",
                                   "--out", "/tmp/x"])
        assert rc == 2
        assert "error:" in err
        assert "unknown scenario" in err

    def test_missing_out(self, capsys):
        rc, _, err = _run(capsys, ["simulate", "--scenario", "parked-jitter"])
        assert rc == 2
        assert "simulate needs" in err


class TestTrack:
    def test_basic_run(self, sim_dir, tmp_path, capsys):
        res = tmp_path / "res.txt"
        rc, out, _ = _run(capsys, [
            "track", "--detections", str(sim_dir / "detections.txt"),
            "--poses", str(sim_dir / "poses.txt"),
            "--out", str(res), "--preset", "virconv",
        ])
        assert rc == 0
        assert "frames=" in out and "born=" in out
        results = kitti_io.read_results(res)
        assert results  # something was emitted

    def test_metrics_json(self, sim_dir, tmp_path):
        res = tmp_path / "res.txt"
        mpath = tmp_path / "run.json"
        rc = main(["track", "--detections", str(sim_dir / "detections.txt"),
                   "--poses", str(sim_dir / "poses.txt"), "--out", str(res),
                   "--metrics-json", str(mpath)])
        assert rc == 0
        payload = json.loads(mpath.read_text())
        for key in ("frames", "born", "pruned", "confirmed", "fps"):
            assert key in payload
        assert payload["frames"] == simulate.get_scenario("parked-jitter").duration

    def test_unknown_preset(self, sim_dir, tmp_path, capsys):
        rc, _, err = _run(capsys, [
            "track", "--detections", str(sim_dir / "detections.txt"),
            "--poses", str(sim_dir / "poses.txt"),
            "--out", str(tmp_path / "r.txt"), "--preset", "megadetector",
        ])
        assert rc == 2
        assert "unknown detector" in err

    def test_config_and_preset_conflict(self, sim_dir, tmp_path, capsys):
        cfgp = tmp_path / "cfg.txt"
        save_config(preset("second"), cfgp)
        rc, _, err = _run(capsys, [
            "track", "--detections", str(sim_dir / "detections.txt"),
            "--poses", str(sim_dir / "poses.txt"),
            "--out", str(tmp_path / "r.txt"),
            "--preset", "second", "--config", str(cfgp),
        ])
        assert rc == 2
        assert "not both" in err

    def test_config_file_run(self, sim_dir, tmp_path):
        cfgp = tmp_path / "cfg.txt"
        save_config(preset("virconv", emit_unconfirmed=True), cfgp)
        res = tmp_path / "r.txt"
        assert main(["track", "--detections", str(sim_dir / "detections.txt"),
                     "--poses", str(sim_dir / "poses.txt"),
                     "--out", str(res), "--config", str(cfgp)]) == 0
        assert kitti_io.read_results(res)

    def test_by_class_flag(self, sim_dir, tmp_path):
        res = tmp_path / "r.txt"
        assert main(["track", "--detections", str(sim_dir / "detections.txt"),
                     "--poses", str(sim_dir / "poses.txt"),
                     "--out", str(res), "--by-class"]) == 0


class TestCalibrateAndNoiseModel:
    @pytest.fixture()
    def cal_dir(self, tmp_path):
        out = tmp_path / "cal"
        assert main(["simulate", "--scenario", "calibration", "--out",
                     str(out)]) == 0
        return out

    def test_calibrate_recovers_jitter(self, cal_dir, tmp_path, capsys):
        model_path = tmp_path / "model.txt"
        rc, out, _ = _run(capsys, [
            "calibrate", "--detections", str(cal_dir / "detections.txt"),
            "--labels", str(cal_dir / "labels.txt"),
            "--detector", "bench-rig", "--out", str(model_path),
        ])
        assert rc == 0
        assert "fitted" in out
        model = noise.load_noise_model(model_path)
        assert model.detector_name == "bench-rig"
        assert abs(model.var_x - 0.017221) / 0.017221 <= 0.2
        assert abs(model.var_y - 0.005901) / 0.005901 <= 0.2

    def test_track_accepts_noise_model(self, cal_dir, sim_dir, tmp_path):
        model_path = tmp_path / "model.txt"
        assert main(["calibrate",
                     "--detections", str(cal_dir / "detections.txt"),
                     "--labels", str(cal_dir / "labels.txt"),
                     "--poses", str(cal_dir / "poses.txt"),
                     "--out", str(model_path)]) == 0
        res = tmp_path / "r.txt"
        assert main(["track", "--detections", str(sim_dir / "detections.txt"),
                     "--poses", str(sim_dir / "poses.txt"), "--out", str(res),
                     "--noise-model", str(model_path)]) == 0
        assert kitti_io.read_results(res)


class TestEval:
    def test_eval_and_report(self, sim_dir, tmp_path, capsys):
        res = tmp_path / "res.txt"
        assert main(["track", "--detections", str(sim_dir / "detections.txt"),
                     "--poses", str(sim_dir / "poses.txt"), "--out", str(res),
                     "--emit-unconfirmed"]) == 0
        report = tmp_path / "metrics.txt"
        rc, out, _ = _run(capsys, [
            "eval", "--results", str(res),
            "--labels", str(sim_dir / "labels.txt"),
            "--report", str(report),
        ])
        assert rc == 0
        assert "mota" in out
        kv = kitti_io.read_keyvalues(report)
        for key in ("mota", "hota_simplified", "deta", "assa", "idsw"):
            assert key in kv
        assert 0.0 <= float(kv["mota"]) <= 1.0


class TestBenchAndPlot:
    def test_bench_writes_reports(self, sim_dir, tmp_path, capsys):
        report = tmp_path / "bench.txt"
        csv = tmp_path / "lat.csv"
        rc, out, _ = _run(capsys, [
            "bench", "--detections", str(sim_dir / "detections.txt"),
            "--poses", str(sim_dir / "poses.txt"),
            "--repetitions", "3", "--report", str(report),
            "--latency-csv", str(csv),
        ])
        assert rc == 0
        assert "fps" in out
        kv = kitti_io.read_keyvalues(report)
        assert float(kv["fps"]) > 0.0
        lines = csv.read_text().splitlines()
        assert lines[0] == "frame,total_us"
        assert len(lines) == 1 + int(kv["frames"])

    def test_plot_both_panels(self, sim_dir, tmp_path):
        res = tmp_path / "res.txt"
        assert main(["track", "--detections", str(sim_dir / "detections.txt"),
                     "--poses", str(sim_dir / "poses.txt"), "--out", str(res),
                     "--emit-unconfirmed"]) == 0
        report = tmp_path / "metrics.txt"
        assert main(["eval", "--results", str(res),
                     "--labels", str(sim_dir / "labels.txt"),
                     "--report", str(report)]) == 0
        csv = tmp_path / "lat.csv"
        assert main(["bench", "--detections", str(sim_dir / "detections.txt"),
                     "--poses", str(sim_dir / "poses.txt"),
                     "--repetitions", "3", "--latency-csv", str(csv)]) == 0
        svg = tmp_path / "charts.svg"
        assert main(["plot", "--latency-csv", str(csv),
                     "--metrics-kv", str(report), "--out", str(svg)]) == 0
        body = svg.read_text()
        assert "<svg" in body

    def test_plot_needs_an_input(self, tmp_path, capsys):
        rc, _, err = _run(capsys, ["plot", "--out", str(tmp_path / "x.svg")])
        assert rc == 2
        assert "plot needs" in err


class TestConfigRoundTripViaCli:
    def test_saved_config_loads_identically(self, tmp_path):
        cfg = preset("pointrcnn", emit_unconfirmed=True)
        path = tmp_path / "cfg.txt"
        save_config(cfg, path)
        assert load_config(path) == cfg
