"""CLEAR-style tracking metrics plus a simplified HOTA.

Predictions and ground truth are matched per frame by a minimum-cost
assignment on (1 - ground-plane IoU); pairs whose IoU falls below the match
threshold are rejected. Identity switches are counted whenever a ground-truth
identity's matched prediction id changes between its consecutive matched
frames. The simplified HOTA is the geometric mean of a detection term
TP / (TP + FP + FN) and an association term equal to the mean IoU over all
matched pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import EvaluationError
from .geometry import Box3D, bev_iou

# One identity counts as mostly tracked when matched in at least this share
# of the frames it appears in.
MT_COVERAGE = 0.8


@dataclass(frozen=True)
class FrameCounts:
    frame: int
    tp: int
    fp: int
    fn: int
    idsw: int
    gt: int


@dataclass(frozen=True)
class MetricsReport:
    mota: float
    hota_simplified: float
    deta: float
    assa: float
    tp: int
    fp: int
    fn: int
    idsw: int
    gt_count: int
    mostly_tracked: int
    gt_identities: int
    per_frame: tuple[FrameCounts, ...]

    def as_dict(self) -> dict[str, float | int]:
        return {
            "mota": self.mota,
            "hota_simplified": self.hota_simplified,
            "deta": self.deta,
            "assa": self.assa,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "idsw": self.idsw,
            "gt_count": self.gt_count,
            "mostly_tracked": self.mostly_tracked,
            "gt_identities": self.gt_identities,
        }


def evaluate(
    predictions: Sequence[Sequence[tuple[int, Box3D]]],
    ground_truth: Sequence[Sequence[tuple[int, Box3D]]],
    match_threshold: float = 0.5,
) -> MetricsReport:
    """Score per-frame (track_id, box) predictions against ground truth.

    Both sequences are indexed by frame and must have the same length.
    """
    if not 0.0 < match_threshold < 1.0:
        raise ValueError("match_threshold must lie strictly between 0 and 1")
    if len(predictions) != len(ground_truth):
        raise EvaluationError(
            f"sequence length mismatch: {len(predictions)} predicted frames "
            f"vs {len(ground_truth)} ground-truth frames"
        )

    tp = fp = fn = idsw = gt_count = 0
    iou_sum = 0.0
    last_match: dict[int, int] = {}  # gt id -> last matched prediction id
    gt_frames: dict[int, int] = {}  # gt id -> frames present
    gt_matched: dict[int, int] = {}  # gt id -> frames matched
    per_frame: list[FrameCounts] = []

    for frame, (preds, gts) in enumerate(zip(predictions, ground_truth)):
        gt_count += len(gts)
        for gid, _box in gts:
            gt_frames[gid] = gt_frames.get(gid, 0) + 1

        pairs: list[tuple[int, int, float]] = []
        if preds and gts:
            iou = np.zeros((len(preds), len(gts)))
            for i, (_pid, pbox) in enumerate(preds):
                for j, (_gid, gbox) in enumerate(gts):
                    iou[i, j] = bev_iou(pbox, gbox)
            rows, cols = linear_sum_assignment(1.0 - iou)
            pairs = [
                (r, c, float(iou[r, c]))
                for r, c in zip(rows, cols)
                if iou[r, c] >= match_threshold
            ]

        frame_idsw = 0
        for r, c, pair_iou in pairs:
            pid = preds[r][0]
            gid = gts[c][0]
            iou_sum += pair_iou
            gt_matched[gid] = gt_matched.get(gid, 0) + 1
            if gid in last_match and last_match[gid] != pid:
                frame_idsw += 1
            last_match[gid] = pid

        frame_tp = len(pairs)
        frame_fp = len(preds) - frame_tp
        frame_fn = len(gts) - frame_tp
        tp += frame_tp
        fp += frame_fp
        fn += frame_fn
        idsw += frame_idsw
        per_frame.append(
            FrameCounts(
                frame=frame,
                tp=frame_tp,
                fp=frame_fp,
                fn=frame_fn,
                idsw=frame_idsw,
                gt=len(gts),
            )
        )

    mota = 1.0 - (fp + fn + idsw) / gt_count if gt_count > 0 else float("nan")
    denom = tp + fp + fn
    deta = tp / denom if denom > 0 else 1.0
    assa = iou_sum / tp if tp > 0 else (1.0 if denom == 0 else 0.0)
    hota = float(np.sqrt(deta * assa)) if deta * assa >= 0.0 else float("nan")
    mostly_tracked = sum(
        1
        for gid, present in gt_frames.items()
        if gt_matched.get(gid, 0) / present >= MT_COVERAGE
    )
    return MetricsReport(
        mota=mota,
        hota_simplified=hota,
        deta=deta,
        assa=assa,
        tp=tp,
        fp=fp,
        fn=fn,
        idsw=idsw,
        gt_count=gt_count,
        mostly_tracked=mostly_tracked,
        gt_identities=len(gt_frames),
        per_frame=tuple(per_frame),
    )
