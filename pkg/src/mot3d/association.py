"""Trajectory-detection assignment on ground-plane distance.

A minimum-cost bipartite assignment (Hungarian method, via scipy) pairs cached
trajectories with incoming detections. The cost matrix is padded to square
with a sentinel strictly above any real distance so rectangular instances
reduce to the square problem; sentinel pairs count as unmatched. By default
pairs farther apart than ``sigma`` are demoted to unmatched after the global
optimum is found; ``mask_over_sigma`` instead masks them out beforehand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass(frozen=True)
class AssignmentResult:
    matches: list[tuple[int, int, float]]  # (trajectory_id, detection_index, distance)
    unmatched_detections: list[int]
    unmatched_trajectories: list[int]  # trajectory ids


def _canonicalize_ties(
    pairs: list[tuple[int, int]], cost: np.ndarray, ids: Sequence[int]
) -> list[tuple[int, int]]:
    """Among equal-cost optima, prefer lower trajectory ids on lower detection
    indices. Swapping two pairs is allowed only when it keeps the total cost
    bitwise identical, so the assignment stays optimal."""
    pairs = sorted(pairs, key=lambda rc: ids[rc[0]])
    changed = True
    while changed:
        changed = False
        for i in range(len(pairs)):
            r1, c1 = pairs[i]
            for j in range(i + 1, len(pairs)):
                r2, c2 = pairs[j]
                if c2 < c1 and cost[r1, c2] + cost[r2, c1] == cost[r1, c1] + cost[r2, c2]:
                    pairs[i] = (r1, c2)
                    pairs[j] = (r2, c1)
                    r1, c1 = pairs[i]
                    changed = True
    return pairs


def associate(
    track_positions: Sequence[tuple[int, Sequence[float]]],
    det_positions: Sequence[Sequence[float]],
    sigma: float,
    mask_over_sigma: bool = False,
) -> AssignmentResult:
    """Assign detections to trajectories by Euclidean ground-plane distance.

    ``track_positions`` holds (trajectory_id, position) pairs; ids must be
    unique. Matches always satisfy distance <= sigma.
    """
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    ids = [tid for tid, _ in track_positions]
    if len(set(ids)) != len(ids):
        raise ValueError("trajectory ids must be unique")
    n_trk = len(track_positions)
    n_det = len(det_positions)
    if n_trk == 0 or n_det == 0:
        return AssignmentResult(
            matches=[],
            unmatched_detections=list(range(n_det)),
            unmatched_trajectories=sorted(ids),
        )

    tpos = np.array([p for _, p in track_positions], dtype=float).reshape(n_trk, 2)
    dpos = np.array(det_positions, dtype=float).reshape(n_det, 2)
    diff = tpos[:, None, :] - dpos[None, :, :]
    cost = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    sentinel = max(float(cost.max()), sigma) * 2.0 + 1.0
    work = cost.copy()
    if mask_over_sigma:
        work[work > sigma] = sentinel
    side = max(n_trk, n_det)
    square = np.full((side, side), sentinel)
    square[:n_trk, :n_det] = work
    rows, cols = linear_sum_assignment(square)

    pairs = [
        (int(r), int(c))
        for r, c in zip(rows, cols)
        if r < n_trk and c < n_det and square[r, c] < sentinel
    ]
    pairs = _canonicalize_ties(pairs, cost, ids)

    matches: list[tuple[int, int, float]] = []
    matched_trk: set[int] = set()
    matched_det: set[int] = set()
    for r, c in pairs:
        dist = float(cost[r, c])
        if dist > sigma:
            continue  # optimal but too far apart: both sides stay unmatched
        matches.append((ids[r], c, dist))
        matched_trk.add(r)
        matched_det.add(c)

    matches.sort(key=lambda m: m[0])
    return AssignmentResult(
        matches=matches,
        unmatched_detections=sorted(set(range(n_det)) - matched_det),
        unmatched_trajectories=sorted(
            ids[r] for r in set(range(n_trk)) - matched_trk
        ),
    )
