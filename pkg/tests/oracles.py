"""Independent reference implementations used to cross-check the library.

These deliberately take different routes than the package code (permutation
enumeration instead of the Hungarian method, dense matrix inverses instead of
closed-form 2x2 solves, vectorized set logic instead of early-exit loops) so
that agreement between the two is evidence of correctness rather than of
shared bugs.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def squared_distance_matrix(track_xy, det_xy):
    """Pairwise ground-plane distances with plain scalar arithmetic."""
    out = np.zeros((len(track_xy), len(det_xy)))
    for i, (tx, ty) in enumerate(track_xy):
        for j, (dx, dy) in enumerate(det_xy):
            out[i, j] = math.sqrt((tx - dx) * (tx - dx) + (ty - dy) * (ty - dy))
    return out


_PERM_CACHE: dict[int, np.ndarray] = {}


def _permutations(side: int) -> np.ndarray:
    if side not in _PERM_CACHE:
        _PERM_CACHE[side] = np.array(
            list(itertools.permutations(range(side))), dtype=int
        )
    return _PERM_CACHE[side]


def brute_force_square_optimum(square: np.ndarray) -> tuple[float, list[tuple[int, int]]]:
    """Exhaustive minimum-total-cost assignment on a square cost matrix."""
    side = square.shape[0]
    perms = _permutations(side)
    totals = square[np.arange(side)[None, :], perms].sum(axis=1)
    best = int(np.argmin(totals))
    return float(totals[best]), [(r, int(c)) for r, c in enumerate(perms[best])]


def oracle_associate(track_positions, det_positions, sigma, mask_over_sigma=False):
    """Exhaustive-search twin of association.associate.

    Returns (matches, unmatched_detections, unmatched_trajectory_ids) with the
    same ordering conventions. Assumes the instance has a unique optimum as a
    set of pairs (continuous random costs), so no tie-breaking is needed.
    """
    ids = [tid for tid, _ in track_positions]
    n_trk = len(ids)
    n_det = len(det_positions)
    if n_trk == 0 or n_det == 0:
        return [], sorted(range(n_det)), sorted(ids)

    cost = squared_distance_matrix([p for _, p in track_positions], det_positions)
    sentinel = max(float(cost.max()), sigma) * 2.0 + 1.0
    work = cost.copy()
    if mask_over_sigma:
        work[work > sigma] = sentinel
    side = max(n_trk, n_det)
    square = np.full((side, side), sentinel)
    square[:n_trk, :n_det] = work

    _total, pairs = brute_force_square_optimum(square)
    matches = []
    matched_trk: set[int] = set()
    matched_det: set[int] = set()
    for r, c in pairs:
        if r >= n_trk or c >= n_det or square[r, c] >= sentinel:
            continue
        dist = float(cost[r, c])
        if dist > sigma:
            continue
        matches.append((ids[r], c, dist))
        matched_trk.add(r)
        matched_det.add(c)
    matches.sort(key=lambda m: m[0])
    return (
        matches,
        sorted(set(range(n_det)) - matched_det),
        sorted(ids[r] for r in set(range(n_trk)) - matched_trk),
    )


def textbook_kf_predict(x, p, f_mat, q_mat):
    """Plain predict step, no symmetrization."""
    return f_mat @ x, f_mat @ p @ f_mat.T + q_mat


def textbook_kf_update(x, p, z, h_mat, r_mat):
    """Plain update via a dense inverse and the (I - KH)P form."""
    s = h_mat @ p @ h_mat.T + r_mat
    k = p @ h_mat.T @ np.linalg.inv(s)
    x_new = x + k @ (np.asarray(z, dtype=float) - h_mat @ x)
    p_new = (np.eye(len(x)) - k @ h_mat) @ p
    return x_new, p_new


def gate_oracle(detections, confirmed_positions, alpha_conf, alpha_nconf, sigma):
    """Set-logic twin of the intake gate.

    Returns [(detection, via_proximity)] in input order. Uses a full minimum
    over confirmed positions instead of an early-exit scan.
    """
    out = []
    for det in detections:
        score = det.score
        if score <= alpha_conf:
            continue
        near = any(
            math.hypot(px - det.box.cx, py - det.box.cy) <= sigma
            for px, py in confirmed_positions
        )
        via_proximity = score < alpha_nconf and near
        if score >= alpha_nconf or via_proximity:
            out.append((det, via_proximity))
    return out


def certainty_trace(observations, alpha_legit, s_min=0.01):
    """Direct evaluation of the certainty recurrence over an observation list.

    ``observations`` is a sequence of (frame, score) pairs in increasing frame
    order, the first being the birth observation. Returns the list of
    (score_value, confirmed) after each observation.
    """
    frames = [f for f, _ in observations]
    scores = [s for _, s in observations]
    value = max(scores[0], s_min)
    confirmed = value >= alpha_legit
    out = [(value, confirmed)]
    last = frames[0]
    for frame, score in zip(frames[1:], scores[1:]):
        if not confirmed:
            s_eff = max(score, s_min)
            gap = frame - (last + 1)
            value = s_eff * math.exp(-gap) - gap / s_eff + value
            confirmed = value >= alpha_legit
        last = frame
        out.append((value, confirmed))
    return out


def axis_aligned_iou(a, b):
    """Closed-form IoU for yaw-0 boxes, for checking the polygon-clipping path."""
    ix = max(
        0.0,
        min(a.cx + a.length / 2, b.cx + b.length / 2)
        - max(a.cx - a.length / 2, b.cx - b.length / 2),
    )
    iy = max(
        0.0,
        min(a.cy + a.width / 2, b.cy + b.width / 2)
        - max(a.cy - a.width / 2, b.cy - b.width / 2),
    )
    inter = ix * iy
    union = a.length * a.width + b.length * b.width - inter
    return inter / union if union > 0 else 0.0


def covariance_after_coast(params, n_obs: int, n_coast: int) -> np.ndarray:
    """Covariance recursion oracle: P after n_obs update/predict cycles and
    n_coast further predicts, computed with dense numpy operations only."""
    p = params.p0_mat.copy()
    f, h = params.f_mat, params.h_mat
    r_eff = params.r_mat + params.d_mat
    p = f @ p @ f.T + params.q_mat
    for _ in range(n_obs - 1):
        s = h @ p @ h.T + r_eff
        k = p @ h.T @ np.linalg.inv(s)
        p = p - k @ h @ p
        p = f @ p @ f.T + params.q_mat
    for _ in range(n_coast):
        p = f @ p @ f.T + params.q_mat
    return p
