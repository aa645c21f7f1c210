"""Single-copy environment: one robot, one map, one episode at a time.

Implemented as a width-1 SimBatch so behaviour matches one lane of the
vectorized environment exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from color_rl import kernels
from color_rl.sim.core import STATE_DIM, BatchStep, EpisodeTerminated, SimBatch
from color_rl.sim.gridmap import GridMap
from color_rl.sim.params import DiversityRanges, EnvConfig, LidarConfig, SimParams
from color_rl.sim.reward import Event

__all__ = [
    "Event",
    "EpisodeTerminated",
    "LidarConfig",
    "RobotEnv",
    "RobotState",
    "STATE_DIM",
    "StepOutcome",
    "check_collision",
    "lidar_scan",
]


@dataclass(frozen=True)
class RobotState:
    x_cm: float
    y_cm: float
    heading_rad: float
    v_linear_cm_s: float
    v_angular_rad_s: float
    radius_cm: float
    pending_actions: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class StepOutcome:
    state: np.ndarray
    reward: float
    done: bool
    truncated: bool
    event: Event


class RobotEnv:
    """One robot navigating one grid map toward its goal disc."""

    def __init__(self, grid_map: GridMap, ranges: DiversityRanges | None = None,
                 config: EnvConfig | None = None, kernel_backend=None):
        self.grid_map = grid_map
        self.config = config or EnvConfig()
        self.ranges = ranges or DiversityRanges()
        self._batch = SimBatch([grid_map], [0], [self.ranges], self.config,
                               kernel_backend=kernel_backend)

    def reset(self, rng: np.random.Generator | int | None = None) -> np.ndarray:
        """Resample episode parameters and spawn pose; returns the initial state."""
        if isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(int(rng))
        return self._batch.reset_lane(0, rng)

    def step(self, action: int) -> StepOutcome:
        out: BatchStep = self._batch.step_all(np.array([action]))
        return StepOutcome(
            state=out.states[0],
            reward=float(out.rewards[0]),
            done=bool(out.dones[0]),
            truncated=bool(out.truncated[0]),
            event=Event(int(out.events[0])),
        )

    def encode_state(self) -> np.ndarray:
        return self._batch.encode_all()[0]

    @property
    def params(self) -> SimParams:
        return self._batch.params[0]

    @property
    def state(self) -> RobotState:
        b = self._batch
        return RobotState(
            x_cm=float(b.x[0]), y_cm=float(b.y[0]),
            heading_rad=float(b.heading[0]),
            v_linear_cm_s=float(b.v[0, 0]), v_angular_rad_s=float(b.v[0, 1]),
            radius_cm=float(self.config.robot_radius_cm),
            pending_actions=tuple(b._pending[0]),
        )

    @property
    def last_scan(self) -> np.ndarray:
        return self._batch.last_scan[0].copy()

    @property
    def steps_taken(self) -> int:
        return int(self._batch.step_count[0])

    @property
    def episode_over(self) -> bool:
        return bool(self._batch.needs_reset[0])

    def render_ascii(self) -> str:
        return self.grid_map.to_ascii(robot_xy=(self._batch.x[0], self._batch.y[0]))


def lidar_scan(grid_map: GridMap, pose: RobotState, cfg: LidarConfig | None = None,
               noise_std: float = 0.0, rng: np.random.Generator | None = None,
               kernel_backend=None) -> np.ndarray:
    """Range per beam from the robot centre to the first obstacle.

    Zero-mean Gaussian noise of the given std is added, then ranges are
    clamped to [0, max_range].
    """
    cfg = cfg or LidarConfig()
    be = kernels.get_backend(kernel_backend)
    angles = pose.heading_rad + cfg.beam_offsets()
    occ = grid_map.occupancy[None].astype(np.uint8)
    edt = grid_map.edt_cells()[None]
    midx = np.zeros(cfg.n_beams, dtype=np.int64)
    raw = kernels.cast_rays(
        occ, edt, midx,
        np.full(cfg.n_beams, pose.x_cm), np.full(cfg.n_beams, pose.y_cm),
        np.cos(angles), np.sin(angles),
        grid_map.cell_size_cm, cfg.max_range_cm, backend=be)
    if noise_std < 0:
        raise ValueError("noise_std must be non-negative")
    if noise_std > 0:
        if rng is None:
            raise ValueError("noisy scans need a random stream")
        raw = raw + rng.normal(0.0, noise_std, cfg.n_beams)
    return np.clip(raw, 0.0, cfg.max_range_cm)


def check_collision(grid_map: GridMap, pose: RobotState | tuple,
                    radius_cm: float | None = None, kernel_backend=None) -> bool:
    """True iff the robot disc overlaps an occupied cell or exits the map."""
    if isinstance(pose, RobotState):
        x, y = pose.x_cm, pose.y_cm
        radius_cm = pose.radius_cm if radius_cm is None else radius_cm
    else:
        x, y = pose
        if radius_cm is None:
            raise ValueError("radius_cm required when pose is a bare point")
    be = kernels.get_backend(kernel_backend)
    occ = grid_map.occupancy[None].astype(np.uint8)
    hit = kernels.disc_collides(
        occ, np.zeros(1, dtype=np.int64), np.array([float(x)]),
        np.array([float(y)]), np.array([float(radius_cm)]),
        grid_map.cell_size_cm, backend=be)
    return bool(hit[0])
