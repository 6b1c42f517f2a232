"""Constant-acceleration ground-plane Kalman filter.

The state is [x, y, vx, vy, ax, ay] with a one-frame time step. Only the
ground-plane position is observed. The innovation covariance adds a fixed
detector-localization noise term on top of the usual measurement noise, so
bounding-box jitter is absorbed instead of being interpreted as motion.

Operations are pure: they take a state value and return a new one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UpdateError

STATE_DIM = 6
OBS_DIM = 2

# Declared defaults. The process-noise intensity is deliberately small: the
# uncertainty-based track termination compares position variance against a
# fixed threshold, and established tracks must coast through occlusions of
# tens of frames without crossing it.
DEFAULT_R_VAR = 0.01
DEFAULT_Q_INTENSITY = 2e-8
DEFAULT_P0 = (1.0, 1.0, 1.0)

_SYM_TOL = 1e-9
_PSD_TOL = 1e-9


def _transition_matrix() -> np.ndarray:
    f = np.eye(STATE_DIM)
    f[0, 2] = f[1, 3] = f[2, 4] = f[3, 5] = 1.0
    f[0, 4] = f[1, 5] = 0.5
    return f


def _observation_matrix() -> np.ndarray:
    h = np.zeros((OBS_DIM, STATE_DIM))
    h[0, 0] = h[1, 1] = 1.0
    return h


def _process_noise(intensity: float) -> np.ndarray:
    # discrete white-noise acceleration: per-axis noise gain [dt^2/2, dt, 1]
    gx = np.array([0.5, 0.0, 1.0, 0.0, 1.0, 0.0])
    gy = np.array([0.0, 0.5, 0.0, 1.0, 0.0, 1.0])
    return intensity * (np.outer(gx, gx) + np.outer(gy, gy))


def _check_symmetric_psd(name: str, m: np.ndarray) -> None:
    if float(np.max(np.abs(m - m.T))) > _SYM_TOL:
        raise ValueError(f"{name} must be symmetric")
    if float(np.min(np.linalg.eigvalsh(m))) < -_PSD_TOL:
        raise ValueError(f"{name} must be positive semi-definite")


@dataclass(frozen=True, eq=False)
class FilterParams:
    """Immutable filter configuration matrices."""

    f_mat: np.ndarray  # (6, 6) state transition
    h_mat: np.ndarray  # (2, 6) observation
    q_mat: np.ndarray  # (6, 6) process noise
    r_mat: np.ndarray  # (2, 2) measurement noise
    d_mat: np.ndarray  # (2, 2) detector localization noise
    p0_mat: np.ndarray  # (6, 6) initial state covariance

    def __post_init__(self) -> None:
        shapes = {
            "f_mat": (STATE_DIM, STATE_DIM),
            "h_mat": (OBS_DIM, STATE_DIM),
            "q_mat": (STATE_DIM, STATE_DIM),
            "r_mat": (OBS_DIM, OBS_DIM),
            "d_mat": (OBS_DIM, OBS_DIM),
            "p0_mat": (STATE_DIM, STATE_DIM),
        }
        for name, shape in shapes.items():
            m = np.array(getattr(self, name), dtype=float)
            if m.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {m.shape}")
            object.__setattr__(self, name, m)
        for name in ("q_mat", "r_mat", "d_mat", "p0_mat"):
            _check_symmetric_psd(name, getattr(self, name))
        for row in self.h_mat:
            if np.count_nonzero(row) != 1 or not np.any(row == 1.0):
                raise ValueError("h_mat rows must each contain exactly one unit entry")


def make_filter_params(
    d_var: tuple[float, float],
    r_var: float = DEFAULT_R_VAR,
    q_intensity: float = DEFAULT_Q_INTENSITY,
    p0: tuple[float, float, float] = DEFAULT_P0,
) -> FilterParams:
    """Build standard parameters from scalar settings.

    ``d_var`` holds per-axis detector localization variances, ``p0`` holds
    (position, velocity, acceleration) initial variances per axis.
    """
    p_pos, p_vel, p_acc = p0
    return FilterParams(
        f_mat=_transition_matrix(),
        h_mat=_observation_matrix(),
        q_mat=_process_noise(q_intensity),
        r_mat=np.eye(OBS_DIM) * r_var,
        d_mat=np.diag([d_var[0], d_var[1]]).astype(float),
        p0_mat=np.diag([p_pos, p_pos, p_vel, p_vel, p_acc, p_acc]).astype(float),
    )


@dataclass(eq=False, slots=True)
class FilterState:
    """State estimate: mean vector and covariance. Treated as immutable."""

    x_vec: np.ndarray  # (6,)
    p_mat: np.ndarray  # (6, 6)

    @property
    def position(self) -> np.ndarray:
        return self.x_vec[:2]

    def validate(self) -> None:
        """Check the covariance invariants (used by tests and debugging)."""
        if self.x_vec.shape != (STATE_DIM,) or self.p_mat.shape != (STATE_DIM, STATE_DIM):
            raise ValueError("state has wrong dimensions")
        _check_symmetric_psd("p_mat", self.p_mat)


def init_state(z: np.ndarray, params: FilterParams) -> FilterState:
    """Start a state at an observed position with zero velocity/acceleration."""
    x = np.zeros(STATE_DIM)
    x[0] = z[0]
    x[1] = z[1]
    return FilterState(x_vec=x, p_mat=params.p0_mat.copy())


def predict(state: FilterState, params: FilterParams) -> FilterState:
    """Advance the state one frame through the motion model."""
    f = params.f_mat
    x = f @ state.x_vec
    p = f @ state.p_mat @ f.T + params.q_mat
    p = (p + p.T) * 0.5
    return FilterState(x_vec=x, p_mat=p)


def _innovation(p_mat: np.ndarray, params: FilterParams) -> tuple[np.ndarray, np.ndarray]:
    hp = params.h_mat @ p_mat
    s = hp @ params.h_mat.T + params.r_mat + params.d_mat
    return hp, s


def _solve_gain(hp: np.ndarray, s: np.ndarray) -> np.ndarray:
    det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    if not det > 0.0:
        raise UpdateError("innovation covariance is singular")
    s_inv = (
        np.array([[s[1, 1], -s[0, 1]], [-s[1, 0], s[0, 0]]]) / det
    )
    return hp.T @ s_inv


def gain(state: FilterState, params: FilterParams) -> np.ndarray:
    """Kalman gain the next update would apply, shape (6, 2)."""
    hp, s = _innovation(state.p_mat, params)
    return _solve_gain(hp, s)


def update(state: FilterState, z: np.ndarray, params: FilterParams) -> FilterState:
    """Fold one position observation into the state.

    The innovation covariance is H P H^T + R + D; the posterior covariance is
    (I - K H) P, re-symmetrized to keep round-off from accumulating.
    """
    hp, s = _innovation(state.p_mat, params)
    k = _solve_gain(hp, s)
    resid = np.asarray(z, dtype=float) - params.h_mat @ state.x_vec
    x = state.x_vec + k @ resid
    p = state.p_mat - k @ hp
    p = (p + p.T) * 0.5
    return FilterState(x_vec=x, p_mat=p)
