"""Tracker configuration: presets per detector and key-value file round-trip.

The config file is plain ``key = value`` text (see README for the key list).
Presets carry, per supported detector, the fitted localization variances and
the gate/validity thresholds that work well with that detector's score scale.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ParseError
from .gate import GateConfig
from .kalman import (
    DEFAULT_P0,
    DEFAULT_Q_INTENSITY,
    DEFAULT_R_VAR,
    FilterParams,
    make_filter_params,
)
from .kitti_io import read_keyvalues, write_keyvalues
from .noise import NoiseModel
from .validity import ValidityConfig


@dataclass(frozen=True)
class FilterSettings:
    """Scalar filter settings, expanded to matrices by ``build_params``."""

    d_var_x: float
    d_var_y: float
    r_var: float = DEFAULT_R_VAR
    q_intensity: float = DEFAULT_Q_INTENSITY
    p0_pos: float = DEFAULT_P0[0]
    p0_vel: float = DEFAULT_P0[1]
    p0_acc: float = DEFAULT_P0[2]

    def build_params(self, use_d: bool = True) -> FilterParams:
        d = (self.d_var_x, self.d_var_y) if use_d else (0.0, 0.0)
        return make_filter_params(
            d_var=d,
            r_var=self.r_var,
            q_intensity=self.q_intensity,
            p0=(self.p0_pos, self.p0_vel, self.p0_acc),
        )


@dataclass(frozen=True)
class TrackerConfig:
    detector: str
    gate: GateConfig
    validity: ValidityConfig
    filter: FilterSettings
    assoc_sigma: float
    assoc_mask_over_sigma: bool = False
    sigma_est_certainty: float = 4.0  # position-variance termination threshold
    emit_unconfirmed: bool = False
    validity_enabled: bool = True
    d_enabled: bool = True
    z_is_bottom: bool = False

    def __post_init__(self) -> None:
        if not self.assoc_sigma > 0.0:
            raise ValueError("assoc_sigma must be positive")
        if not self.sigma_est_certainty > 0.0:
            raise ValueError("sigma_est_certainty must be positive")

    def with_noise_model(self, model: NoiseModel) -> "TrackerConfig":
        return replace(
            self,
            detector=model.detector_name,
            filter=replace(self.filter, d_var_x=model.var_x, d_var_y=model.var_y),
        )


# Per-detector fitted variances and thresholds.
DETECTOR_PRESETS: dict[str, dict[str, float]] = {
    "virconv": {
        "d_var_x": 0.017221,
        "d_var_y": 0.005901,
        "alpha_nconf": 0.0,
        "alpha_conf": -1.0,
        "alpha_legit": 20.0,
        "sigma": 4.0,
    },
    "casa": {
        "d_var_x": 0.034966,
        "d_var_y": 0.019720,
        "alpha_nconf": 0.0,
        "alpha_conf": 0.0,
        "alpha_legit": 25.0,
        "sigma": 3.0,
    },
    "pointrcnn": {
        "d_var_x": 0.030874,
        "d_var_y": 0.009379,
        "alpha_nconf": 0.0,
        "alpha_conf": 0.0,
        "alpha_legit": 35.0,
        "sigma": 4.0,
    },
    "pvrcnn": {
        "d_var_x": 0.036383,
        "d_var_y": 0.013067,
        "alpha_nconf": 0.5,
        "alpha_conf": 0.5,
        "alpha_legit": 20.0,
        "sigma": 2.0,
    },
    "second": {
        "d_var_x": 0.039156,
        "d_var_y": 0.014357,
        "alpha_nconf": -1.0,
        "alpha_conf": -2.0,
        "alpha_legit": 10.0,
        "sigma": 3.0,
    },
}


def preset(detector: str, **overrides) -> TrackerConfig:
    """Build a TrackerConfig for a supported detector name.

    Keyword overrides replace top-level TrackerConfig fields after the preset
    values are applied.
    """
    key = detector.lower()
    if key not in DETECTOR_PRESETS:
        raise KeyError(
            f"unknown detector {detector!r}; known: {sorted(DETECTOR_PRESETS)}"
        )
    p = DETECTOR_PRESETS[key]
    cfg = TrackerConfig(
        detector=key,
        gate=GateConfig(
            alpha_conf=p["alpha_conf"],
            alpha_nconf=p["alpha_nconf"],
            sigma=p["sigma"],
        ),
        validity=ValidityConfig(alpha_legit=p["alpha_legit"]),
        filter=FilterSettings(d_var_x=p["d_var_x"], d_var_y=p["d_var_y"]),
        assoc_sigma=p["sigma"],
    )
    return replace(cfg, **overrides) if overrides else cfg


def _fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def _parse_bool(value: str, key: str, path: str | Path) -> bool:
    if value == "true":
        return True
    if value == "false":
        return False
    raise ParseError(f"{path}: key {key!r} must be 'true' or 'false', got {value!r}")


def save_config(cfg: TrackerConfig, path: str | Path) -> None:
    write_keyvalues(
        path,
        {
            "detector": cfg.detector,
            "gate.alpha_conf": repr(cfg.gate.alpha_conf),
            "gate.alpha_nconf": repr(cfg.gate.alpha_nconf),
            "gate.sigma": repr(cfg.gate.sigma),
            "assoc.sigma": repr(cfg.assoc_sigma),
            "assoc.mask_over_sigma": _fmt_bool(cfg.assoc_mask_over_sigma),
            "validity.alpha_legit": repr(cfg.validity.alpha_legit),
            "validity.s_min": repr(cfg.validity.s_min),
            "validity.enabled": _fmt_bool(cfg.validity_enabled),
            "filter.d_var_x": repr(cfg.filter.d_var_x),
            "filter.d_var_y": repr(cfg.filter.d_var_y),
            "filter.d_enabled": _fmt_bool(cfg.d_enabled),
            "filter.r_var": repr(cfg.filter.r_var),
            "filter.q_intensity": repr(cfg.filter.q_intensity),
            "filter.p0_pos": repr(cfg.filter.p0_pos),
            "filter.p0_vel": repr(cfg.filter.p0_vel),
            "filter.p0_acc": repr(cfg.filter.p0_acc),
            "terminate.sigma_est_certainty": repr(cfg.sigma_est_certainty),
            "emit_unconfirmed": _fmt_bool(cfg.emit_unconfirmed),
            "io.z_is_bottom": _fmt_bool(cfg.z_is_bottom),
        },
        header="tracker configuration",
    )


def load_config(path: str | Path) -> TrackerConfig:
    kv = read_keyvalues(path)

    def take_float(key: str) -> float:
        try:
            return float(kv.pop(key))
        except KeyError as exc:
            raise ParseError(f"{path}: missing config key {key!r}") from exc
        except ValueError as exc:
            raise ParseError(f"{path}: bad value for {key!r}: {exc}") from exc

    def take_bool(key: str, default: bool) -> bool:
        if key not in kv:
            return default
        return _parse_bool(kv.pop(key), key, path)

    detector = kv.pop("detector", "custom")
    try:
        cfg = TrackerConfig(
            detector=detector,
            gate=GateConfig(
                alpha_conf=take_float("gate.alpha_conf"),
                alpha_nconf=take_float("gate.alpha_nconf"),
                sigma=take_float("gate.sigma"),
            ),
            validity=ValidityConfig(
                alpha_legit=take_float("validity.alpha_legit"),
                s_min=take_float("validity.s_min"),
            ),
            filter=FilterSettings(
                d_var_x=take_float("filter.d_var_x"),
                d_var_y=take_float("filter.d_var_y"),
                r_var=take_float("filter.r_var"),
                q_intensity=take_float("filter.q_intensity"),
                p0_pos=take_float("filter.p0_pos"),
                p0_vel=take_float("filter.p0_vel"),
                p0_acc=take_float("filter.p0_acc"),
            ),
            assoc_sigma=take_float("assoc.sigma"),
            assoc_mask_over_sigma=take_bool("assoc.mask_over_sigma", False),
            sigma_est_certainty=take_float("terminate.sigma_est_certainty"),
            emit_unconfirmed=take_bool("emit_unconfirmed", False),
            validity_enabled=take_bool("validity.enabled", True),
            d_enabled=take_bool("filter.d_enabled", True),
            z_is_bottom=take_bool("io.z_is_bottom", False),
        )
    except ValueError as exc:
        raise ParseError(f"{path}: invalid configuration: {exc}") from exc
    if kv:
        raise ParseError(f"{path}: unknown config keys {sorted(kv)}")
    return cfg
