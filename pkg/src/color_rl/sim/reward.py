"""Step reward and the relative goal geometry it depends on.

Everything is elementwise over arrays so the batched simulator and the
single-copy environment share one code path.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

from color_rl.sim.kinematics import wrap_angle


class Event(IntEnum):
    NONE = 0
    COLLISION = 1
    ARRIVAL = 2
    TIMEOUT = 3


REWARD_COLLISION = -10.0
REWARD_ARRIVAL = 75.0

WEIGHT_GOAL_DIST = 0.3
WEIGHT_CROSS_TRACK = 0.1
WEIGHT_SPEED = 0.3
WEIGHT_HEADING = 0.3
WEIGHT_PROXIMITY = 0.1


def goal_bearing_error(x, y, heading, goal_x, goal_y):
    """Signed angle from the robot heading to the robot->goal bearing, in
    (-pi, pi]."""
    bearing = np.arctan2(np.asarray(goal_y) - y, np.asarray(goal_x) - x)
    return wrap_angle(bearing - np.asarray(heading))


def cross_track_distance(x, y, seg_x0, seg_y0, seg_x1, seg_y1):
    """Distance from (x, y) to the start->goal segment (clamped projection)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    vx = np.asarray(seg_x1, dtype=np.float64) - seg_x0
    vy = np.asarray(seg_y1, dtype=np.float64) - seg_y0
    len2 = vx * vx + vy * vy
    safe = np.where(len2 > 0, len2, 1.0)
    t = np.clip(((x - seg_x0) * vx + (y - seg_y0) * vy) / safe, 0.0, 1.0)
    t = np.where(len2 > 0, t, 0.0)
    ex = x - (seg_x0 + t * vx)
    ey = y - (seg_y0 + t * vy)
    return np.sqrt(ex * ex + ey * ey)


def shaped_reward(d1, d2, alpha, v_linear, v_linear_max, scan_min_cm,
                  planning_dist_cm, proximity_cm=30.0):
    """Dense progress reward for non-terminal steps.

    Terms: distance to goal and cross-track error (1 at zero distance,
    falling linearly over the planning distance), a speed bonus above half
    the linear limit, heading alignment, and an obstacle-proximity penalty
    below proximity_cm.
    """
    r_d1 = np.clip(1.0 - np.asarray(d1) / planning_dist_cm, 0.0, 1.0)
    r_d2 = np.clip(1.0 - np.asarray(d2) / planning_dist_cm, 0.0, 1.0)
    r_v = np.where(np.asarray(v_linear) > np.asarray(v_linear_max) / 2.0, 1.0, 0.0)
    r_alpha = np.clip(1.0 - 2.0 * np.abs(np.asarray(alpha)) / np.pi, -1.0, 1.0)
    r_prox = np.where(np.asarray(scan_min_cm) < proximity_cm, -1.0, 0.0)
    return (WEIGHT_GOAL_DIST * r_d1
            + WEIGHT_CROSS_TRACK * r_d2
            + WEIGHT_SPEED * r_v
            + WEIGHT_HEADING * r_alpha
            + WEIGHT_PROXIMITY * r_prox)


def compute_reward(event, d1, d2, alpha, v_linear, v_linear_max, scan_min_cm,
                   planning_dist_cm, proximity_cm=30.0):
    """Full reward: fixed terminal values, shaped reward otherwise."""
    shaped = shaped_reward(d1, d2, alpha, v_linear, v_linear_max, scan_min_cm,
                           planning_dist_cm, proximity_cm)
    event = np.asarray(event)
    return np.where(event == Event.COLLISION, REWARD_COLLISION,
           np.where(event == Event.ARRIVAL, REWARD_ARRIVAL, shaped))
