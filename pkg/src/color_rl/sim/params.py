"""Per-episode physical parameters and the ranges they are resampled from."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Discrete action set: target (linear cm/s, angular rad/s) pairs.
# 0: turn left, 1: straight+left, 2: straight, 3: straight+right, 4: turn right.
ACTION_TABLE = (
    (0.36, 1.0),
    (18.0, 1.0),
    (18.0, 0.0),
    (18.0, -1.0),
    (0.36, -1.0),
)

MAX_CONTROL_DELAY = 64  # capacity of the pending-action queue


@dataclass(frozen=True)
class SimParams:
    """One episode's physical setup.

    k blends previous and target velocity each control tick (response lag);
    control_delay_steps is how many ticks an issued command waits in the
    queue before taking effect.
    """

    k: float = 0.6
    control_interval_s: float = 0.1
    control_delay_steps: int = 1
    v_linear_max_cm_s: float = 18.0
    v_angular_max_rad_s: float = 1.0
    lidar_noise_std_cm: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.k < 1.0:
            raise ValueError(f"k must lie in (0, 1), got {self.k}")
        if self.control_interval_s <= 0:
            raise ValueError("control interval must be positive")
        if not 0 <= self.control_delay_steps <= MAX_CONTROL_DELAY:
            raise ValueError(
                f"control delay must be in [0, {MAX_CONTROL_DELAY}], "
                f"got {self.control_delay_steps}"
            )
        if self.v_linear_max_cm_s <= 0 or self.v_angular_max_rad_s <= 0:
            raise ValueError("velocity limits must be positive")
        if self.lidar_noise_std_cm < 0:
            raise ValueError("lidar noise std must be non-negative")


@dataclass(frozen=True)
class DiversityRanges:
    """Uniform resampling intervals, one per SimParams field.

    Zero-width intervals reproduce the nominal value exactly.  The sampling
    order is fixed so seeded runs are reproducible.
    """

    k: tuple[float, float] = (0.6, 0.6)
    control_interval_s: tuple[float, float] = (0.1, 0.1)
    control_delay_steps: tuple[int, int] = (1, 1)
    v_linear_max_cm_s: tuple[float, float] = (18.0, 18.0)
    v_angular_max_rad_s: tuple[float, float] = (1.0, 1.0)
    lidar_noise_std_cm: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        for name in ("k", "control_interval_s", "control_delay_steps",
                     "v_linear_max_cm_s", "v_angular_max_rad_s",
                     "lidar_noise_std_cm"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} interval is reversed: ({lo}, {hi})")
        # endpoints must themselves be legal parameter values
        SimParams(self.k[0], self.control_interval_s[0], self.control_delay_steps[0],
                  self.v_linear_max_cm_s[0], self.v_angular_max_rad_s[0],
                  self.lidar_noise_std_cm[0])
        SimParams(self.k[1], self.control_interval_s[1], self.control_delay_steps[1],
                  self.v_linear_max_cm_s[1], self.v_angular_max_rad_s[1],
                  self.lidar_noise_std_cm[1])

    @classmethod
    def around(cls, nominal: SimParams, fraction: float) -> "DiversityRanges":
        """Intervals of +/- fraction around nominal values.

        The integer delay interval is rounded outward so a nonzero fraction
        actually varies it.
        """
        if fraction < 0:
            raise ValueError("diversity fraction must be non-negative")

        def band(v: float) -> tuple[float, float]:
            return (v * (1 - fraction), v * (1 + fraction))

        d = nominal.control_delay_steps
        delay = (
            max(0, math.floor(d * (1 - fraction))),
            min(MAX_CONTROL_DELAY, math.ceil(d * (1 + fraction))),
        )
        return cls(
            k=band(nominal.k),
            control_interval_s=band(nominal.control_interval_s),
            control_delay_steps=delay,
            v_linear_max_cm_s=band(nominal.v_linear_max_cm_s),
            v_angular_max_rad_s=band(nominal.v_angular_max_rad_s),
            lidar_noise_std_cm=band(nominal.lidar_noise_std_cm),
        )

    def sample(self, rng: np.random.Generator) -> SimParams:
        return SimParams(
            k=float(rng.uniform(*self.k)),
            control_interval_s=float(rng.uniform(*self.control_interval_s)),
            control_delay_steps=int(rng.integers(self.control_delay_steps[0],
                                                 self.control_delay_steps[1] + 1)),
            v_linear_max_cm_s=float(rng.uniform(*self.v_linear_max_cm_s)),
            v_angular_max_rad_s=float(rng.uniform(*self.v_angular_max_rad_s)),
            lidar_noise_std_cm=float(rng.uniform(*self.lidar_noise_std_cm)),
        )


@dataclass(frozen=True)
class LidarConfig:
    """Beam fan mounted at the robot centre, centered on the heading."""

    n_beams: int = 27
    fov_rad: float = math.radians(270.0)
    max_range_cm: float = 300.0

    def beam_offsets(self) -> np.ndarray:
        return np.linspace(-self.fov_rad / 2.0, self.fov_rad / 2.0, self.n_beams)


@dataclass(frozen=True)
class EnvConfig:
    """Episode-independent environment settings."""

    robot_radius_cm: float = 9.0
    timeout_steps: int = 1000
    max_planning_dist_cm: float = 0.0  # 0 -> map diagonal
    obstacle_penalty_range_cm: float = 30.0
    lidar: LidarConfig = field(default_factory=LidarConfig)
    action_table: tuple[tuple[float, float], ...] = ACTION_TABLE
    spawn_attempts: int = 256

    def planning_dist(self, grid_map) -> float:
        if self.max_planning_dist_cm > 0:
            return self.max_planning_dist_cm
        return grid_map.diagonal_cm
