"""Online trajectory-validity scoring.

Each trajectory accumulates a certainty score from its observation history:
consecutive observations add roughly their detection score, while gaps are
punished by an exponentially shrunk reward and a gap-proportional penalty.
Crossing ``alpha_legit`` confirms the trajectory permanently; intermittent
ghost tracks keep losing score and never confirm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SequencingError


@dataclass(frozen=True)
class ValidityConfig:
    alpha_legit: float  # certainty level at which a trajectory confirms
    s_min: float = 0.01  # floor applied to scores so the penalty term stays finite

    def __post_init__(self) -> None:
        if not self.alpha_legit > 0.0:
            raise ValueError("alpha_legit must be positive")
        if not self.s_min > 0.0:
            raise ValueError("s_min must be positive")


@dataclass(frozen=True, slots=True)
class CertaintyState:
    score: float
    last_obs_frame: int
    confirmed: bool


def init_certainty(score: float, frame: int, cfg: ValidityConfig) -> CertaintyState:
    """Start the certainty of a trajectory born at ``frame``."""
    s = max(score, cfg.s_min)
    return CertaintyState(score=s, last_obs_frame=frame, confirmed=s >= cfg.alpha_legit)


def update_certainty(
    state: CertaintyState, score: float, frame: int, cfg: ValidityConfig
) -> CertaintyState:
    """Fold one observation at ``frame`` into the certainty state.

    ``frame`` must be strictly later than the previous observation. Once a
    trajectory is confirmed the score is frozen: confirmation is permanent.
    """
    if frame <= state.last_obs_frame:
        raise SequencingError(
            f"observation at frame {frame} not after frame {state.last_obs_frame}"
        )
    if state.confirmed:
        return CertaintyState(score=state.score, last_obs_frame=frame, confirmed=True)
    s = max(score, cfg.s_min)
    gap = frame - (state.last_obs_frame + 1)
    new_score = s * math.exp(-gap) - gap / s + state.score
    return CertaintyState(
        score=new_score,
        last_obs_frame=frame,
        confirmed=new_score >= cfg.alpha_legit,
    )
