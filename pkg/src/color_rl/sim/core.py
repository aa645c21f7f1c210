"""Width-K vectorized simulation engine.

All lanes advance in lockstep through batched array math plus the kernel
calls.  Per-lane arithmetic is identical regardless of batch width, so a
width-1 engine reproduces any lane of a wider one bit for bit.  Lane
resets are the owner's job (RobotEnv raises, VecEnv auto-resets).

State vector layout (length 32): [dx, dy, heading error, linear velocity,
angular velocity, 27 lidar ranges], everything normalized; dx/dy are the
goal offset rotated into the frame of the episode's start heading and scaled
by the planning distance.
"""

from __future__ import annotations

from collections import deque
from typing import NamedTuple, Sequence

import numpy as np

from color_rl import kernels
from color_rl.sim.gridmap import GridMap, MapError
from color_rl.sim.kinematics import apply_kinematics, integrate_unicycle
from color_rl.sim.params import DiversityRanges, EnvConfig
from color_rl.sim.reward import (
    Event,
    compute_reward,
    cross_track_distance,
    goal_bearing_error,
)

STATE_DIM = 32


class EpisodeTerminated(RuntimeError):
    """A finished lane was stepped without being reset."""


class BatchStep(NamedTuple):
    states: np.ndarray     # (K, 32) float32
    rewards: np.ndarray    # (K,) float64
    dones: np.ndarray      # (K,) bool; true terminals only (collision/arrival)
    truncated: np.ndarray  # (K,) bool; timeouts
    events: np.ndarray     # (K,) int8 Event codes


class SimBatch:
    def __init__(self, maps: Sequence[GridMap], map_index: Sequence[int],
                 ranges: Sequence[DiversityRanges], config: EnvConfig | None = None,
                 kernel_backend=None):
        self.config = config or EnvConfig()
        self.maps = list(maps)
        self.map_index = np.asarray(map_index, dtype=np.int64)
        self.n_lanes = len(self.map_index)
        self.ranges = list(ranges)
        if len(self.ranges) != self.n_lanes:
            raise ValueError("need one DiversityRanges per lane")
        if self.map_index.min() < 0 or self.map_index.max() >= len(self.maps):
            raise ValueError("map_index out of range")
        self._kernel = kernels.get_backend(kernel_backend)

        first = self.maps[0]
        for m in self.maps:
            if (m.n_rows, m.n_cols) != (first.n_rows, first.n_cols) \
                    or m.cell_size_cm != first.cell_size_cm:
                raise MapError("all maps in one batch must share grid shape and cell size")
        self.cell = float(first.cell_size_cm)
        self._occ = np.ascontiguousarray(
            np.stack([m.occupancy for m in self.maps]).astype(np.uint8))
        self._edt = np.ascontiguousarray(
            np.stack([m.edt_cells() for m in self.maps]))

        k = self.n_lanes
        lid = self.config.lidar
        self.n_beams = lid.n_beams
        self._offsets = lid.beam_offsets()
        self._max_range = float(lid.max_range_cm)
        self._action_table = np.asarray(self.config.action_table, dtype=np.float64)
        self._radius = np.full(k, float(self.config.robot_radius_cm))

        self.goal_x = np.array([self.maps[i].goal_center[0] for i in self.map_index])
        self.goal_y = np.array([self.maps[i].goal_center[1] for i in self.map_index])
        self.goal_radius = np.array(
            [self.maps[i].goal_radius_cm for i in self.map_index])
        self.planning_dist = np.array(
            [self.config.planning_dist(self.maps[i]) for i in self.map_index])

        self.x = np.zeros(k)
        self.y = np.zeros(k)
        self.heading = np.zeros(k)
        self.v = np.zeros((k, 2))
        self.start_x = np.zeros(k)
        self.start_y = np.zeros(k)
        self._start_cos = np.ones(k)
        self._start_sin = np.zeros(k)
        self.step_count = np.zeros(k, dtype=np.int64)
        self.needs_reset = np.ones(k, dtype=bool)
        self.last_scan = np.full((k, self.n_beams), self._max_range)

        self.param_k = np.zeros(k)
        self.param_dt = np.zeros(k)
        self.param_delay = np.zeros(k, dtype=np.int64)
        self.param_vmax = np.zeros((k, 2))
        self.param_noise = np.zeros(k)
        self.params = [None] * k

        self._pending: list[deque] = [deque() for _ in range(k)]
        self._rngs: list[np.random.Generator | None] = [None] * k
        # per-ray map index, precomputed for the batched scan
        self._ray_midx = np.repeat(self.map_index, self.n_beams)

    # -- resets -------------------------------------------------------------

    def reset_lane(self, i: int, rng: np.random.Generator | None = None) -> np.ndarray:
        """Resample parameters and spawn pose for one lane; returns its state row.

        rng becomes the lane's stream; omit it to keep the current one.
        """
        if rng is not None:
            self._rngs[i] = rng
        rng = self._rngs[i]
        if rng is None:
            raise ValueError("lane has no random stream; pass rng on first reset")

        p = self.ranges[i].sample(rng)
        self.params[i] = p
        self.param_k[i] = p.k
        self.param_dt[i] = p.control_interval_s
        self.param_delay[i] = p.control_delay_steps
        self.param_vmax[i] = (p.v_linear_max_cm_s, p.v_angular_max_rad_s)
        self.param_noise[i] = p.lidar_noise_std_cm

        x0, y0, x1, y1 = self.maps[self.map_index[i]].spawn_region
        mi = self.map_index[i:i + 1]
        for _ in range(self.config.spawn_attempts):
            sx = rng.uniform(x0, x1)
            sy = rng.uniform(y0, y1)
            sth = rng.uniform(-np.pi, np.pi)
            hit = kernels.disc_collides(
                self._occ, mi, np.array([sx]), np.array([sy]),
                self._radius[i:i + 1], self.cell, backend=self._kernel)
            if not hit[0]:
                break
        else:
            raise MapError(
                f"no collision-free spawn pose found in map "
                f"{int(self.map_index[i])} after {self.config.spawn_attempts} attempts")

        self.x[i], self.y[i], self.heading[i] = sx, sy, sth
        self.start_x[i], self.start_y[i] = sx, sy
        self._start_cos[i] = np.cos(sth)
        self._start_sin[i] = np.sin(sth)
        self.v[i] = 0.0
        self.step_count[i] = 0
        self.needs_reset[i] = False
        self._pending[i] = deque([(0.0, 0.0)] * p.control_delay_steps)

        idx = np.array([i])
        raw = self._scan(idx)
        self.last_scan[i] = self._apply_noise(raw, idx)[0]
        return self._encode(idx)[0]

    # -- stepping -----------------------------------------------------------

    def step_all(self, actions) -> BatchStep:
        actions = np.asarray(actions, dtype=np.int64)
        if actions.shape != (self.n_lanes,):
            raise ValueError(f"expected {self.n_lanes} actions, got shape {actions.shape}")
        if actions.min() < 0 or actions.max() >= len(self._action_table):
            raise ValueError("action index out of range")
        if self.needs_reset.any():
            lanes = np.flatnonzero(self.needs_reset)
            raise EpisodeTerminated(
                f"lanes {lanes.tolist()} finished their episode; reset before stepping")

        matured = np.empty((self.n_lanes, 2))
        table = self._action_table
        for i in range(self.n_lanes):
            q = self._pending[i]
            a = table[actions[i]]
            q.append((a[0], a[1]))
            matured[i] = q.popleft()

        self.v = apply_kinematics(self.v, matured, self.param_k[:, None],
                                  self.param_vmax)
        self.x, self.y, self.heading = integrate_unicycle(
            self.x, self.y, self.heading, self.v[:, 0], self.v[:, 1], self.param_dt)

        collided = kernels.disc_collides(
            self._occ, self.map_index, self.x, self.y, self._radius, self.cell,
            backend=self._kernel).astype(bool)
        gdx = self.goal_x - self.x
        gdy = self.goal_y - self.y
        d1 = np.sqrt(gdx * gdx + gdy * gdy)
        arrived = ~collided & (d1 <= self.goal_radius)
        self.step_count += 1
        timed_out = ~collided & ~arrived & (self.step_count >= self.config.timeout_steps)
        events = np.where(collided, int(Event.COLLISION),
                 np.where(arrived, int(Event.ARRIVAL),
                 np.where(timed_out, int(Event.TIMEOUT),
                          int(Event.NONE)))).astype(np.int8)

        all_idx = np.arange(self.n_lanes)
        raw = self._scan(all_idx)
        scan_min = raw.min(axis=1)
        self.last_scan = self._apply_noise(raw, all_idx)

        alpha = goal_bearing_error(self.x, self.y, self.heading,
                                   self.goal_x, self.goal_y)
        d2 = cross_track_distance(self.x, self.y, self.start_x, self.start_y,
                                  self.goal_x, self.goal_y)
        rewards = compute_reward(
            events, d1, d2, alpha, self.v[:, 0], self.param_vmax[:, 0], scan_min,
            self.planning_dist, self.config.obstacle_penalty_range_cm)

        dones = collided | arrived
        self.needs_reset |= dones | timed_out
        states = self._encode(all_idx)
        return BatchStep(states, rewards, dones, timed_out, events)

    # -- observation --------------------------------------------------------

    def _scan(self, idx: np.ndarray) -> np.ndarray:
        angles = self.heading[idx, None] + self._offsets[None, :]
        dirx = np.cos(angles).ravel()
        diry = np.sin(angles).ravel()
        if idx.shape[0] == self.n_lanes:
            midx = self._ray_midx
        else:
            midx = np.repeat(self.map_index[idx], self.n_beams)
        px = np.repeat(self.x[idx], self.n_beams)
        py = np.repeat(self.y[idx], self.n_beams)
        out = kernels.cast_rays(self._occ, self._edt, midx, px, py, dirx, diry,
                                self.cell, self._max_range, backend=self._kernel)
        return out.reshape(idx.shape[0], self.n_beams)

    def _apply_noise(self, raw: np.ndarray, idx: np.ndarray) -> np.ndarray:
        draws = np.empty_like(raw)
        for row, i in enumerate(idx):
            draws[row] = self._rngs[i].normal(0.0, self.param_noise[i], self.n_beams)
        return np.clip(raw + draws, 0.0, self._max_range)

    def _encode(self, idx: np.ndarray) -> np.ndarray:
        rel_x = self.goal_x[idx] - self.x[idx]
        rel_y = self.goal_y[idx] - self.y[idx]
        c0 = self._start_cos[idx]
        s0 = self._start_sin[idx]
        dist = self.planning_dist[idx]
        alpha = goal_bearing_error(self.x[idx], self.y[idx], self.heading[idx],
                                   self.goal_x[idx], self.goal_y[idx])
        out = np.empty((idx.shape[0], STATE_DIM), dtype=np.float32)
        out[:, 0] = (c0 * rel_x + s0 * rel_y) / dist
        out[:, 1] = (-s0 * rel_x + c0 * rel_y) / dist
        out[:, 2] = alpha / np.pi
        out[:, 3] = self.v[idx, 0] / self.param_vmax[idx, 0]
        out[:, 4] = self.v[idx, 1] / self.param_vmax[idx, 1]
        out[:, 5:] = self.last_scan[idx] / self._max_range
        return out

    def encode_all(self) -> np.ndarray:
        return self._encode(np.arange(self.n_lanes))
