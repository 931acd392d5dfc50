"""Camera-motion statistics and the static-trajectory filter.

For consecutive poses, translation steps are normalized by their own mean,
so the normalized mean translation t_bar is exactly 1 for any trajectory
with nonzero translation; rotation stays unscaled:

    delta_t_i  = ||t_{i+1} - t_i||
    delta_th_i = rotation_angle(R_i, R_{i+1})
    s_trans    = mean(delta_t)
    t_bar      = mean(delta_t / s_trans)     (0 when s_trans vanishes)
    r_bar      = mean(delta_th)
    alpha      = t_bar + lam * r_bar + eps

Sequences with alpha below a small threshold are treated as static and
discarded by the curation pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import rotation_angle
from .errors import ValidationError

DEFAULT_LAMBDA = 0.1
DEFAULT_EPSILON = 1e-6
STATIC_ALPHA_THRESHOLD = 0.001

# Below this, the mean translation step is considered exactly degenerate
# and t_bar is defined as 0 instead of dividing by ~0.
_S_TRANS_FLOOR = 1e-12


@dataclass(frozen=True)
class MotionStats:
    delta_t: np.ndarray
    delta_theta: np.ndarray
    s_trans: float
    t_bar: float
    r_bar: float
    alpha: float
    lam: float
    epsilon: float


def motion_stats(poses, lam=DEFAULT_LAMBDA, epsilon=DEFAULT_EPSILON):
    """Per-step motion statistics and the combined motion score alpha."""
    poses = list(poses)
    if len(poses) < 2:
        raise ValidationError(f"need at least 2 poses, got {len(poses)}")

    delta_t = np.array(
        [float(np.linalg.norm(poses[i + 1].t - poses[i].t))
         for i in range(len(poses) - 1)]
    )
    delta_theta = np.array(
        [rotation_angle(poses[i].r, poses[i + 1].r) for i in range(len(poses) - 1)]
    )
    s_trans = float(delta_t.mean())
    t_bar = float((delta_t / s_trans).mean()) if s_trans > _S_TRANS_FLOOR else 0.0
    r_bar = float(delta_theta.mean())
    alpha = t_bar + lam * r_bar + epsilon
    return MotionStats(delta_t, delta_theta, s_trans, t_bar, r_bar, alpha,
                       lam, epsilon)


def is_static(stats: MotionStats, threshold=STATIC_ALPHA_THRESHOLD):
    """True iff the motion score falls strictly below the threshold."""
    return stats.alpha < threshold
