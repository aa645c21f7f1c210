"""Velocity response and pose integration.

All functions are elementwise over numpy arrays, so the same code serves the
single environment (width-1 arrays) and the vectorized batch.
"""

from __future__ import annotations

import numpy as np

# Angular speeds below this are integrated as straight-line motion.
OMEGA_STRAIGHT_EPS = 1e-6

TWO_PI = 2.0 * np.pi


def wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(angle), TWO_PI)


def apply_kinematics(v, v_target, k, v_max=None):
    """Blend current and target velocity: k*v + (1-k)*v_target per component.

    v, v_target: (..., 2) arrays of (linear, angular); k broadcastable.
    When v_max (same shape rules) is given the result is clamped to
    [-v_max, v_max] per axis.
    """
    v = np.asarray(v, dtype=np.float64)
    v_target = np.asarray(v_target, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    out = k * v + (1.0 - k) * v_target
    if v_max is not None:
        v_max = np.asarray(v_max, dtype=np.float64)
        out = np.clip(out, -v_max, v_max)
    return out


def integrate_unicycle(x, y, heading, v_lin, v_ang, dt):
    """Advance poses by one control interval with velocities held constant.

    Exact arc integration; below OMEGA_STRAIGHT_EPS the straight-line limit
    is used.  Returns (x, y, heading) with heading wrapped to (-pi, pi].
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    heading = np.asarray(heading, dtype=np.float64)
    v_lin = np.asarray(v_lin, dtype=np.float64)
    v_ang = np.asarray(v_ang, dtype=np.float64)
    dt = np.asarray(dt, dtype=np.float64)

    sin0 = np.sin(heading)
    cos0 = np.cos(heading)
    heading1 = heading + v_ang * dt
    sin1 = np.sin(heading1)
    cos1 = np.cos(heading1)

    curved = np.abs(v_ang) >= OMEGA_STRAIGHT_EPS
    omega = np.where(curved, v_ang, 1.0)  # dummy 1.0 avoids 0/0 in the dead branch
    radius = v_lin / omega
    new_x = x + np.where(curved, radius * (sin1 - sin0), v_lin * cos0 * dt)
    new_y = y + np.where(curved, -radius * (cos1 - cos0), v_lin * sin0 * dt)
    return new_x, new_y, wrap_angle(heading1)
