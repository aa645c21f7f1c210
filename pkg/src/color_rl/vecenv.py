"""N independent environment copies stepped in lockstep.

Copies can carry different maps and resampling ranges.  Finished copies are
reset automatically; the batch row returned to the policy is then the fresh
initial state while ``store_states`` keeps the true terminal state for the
replay buffer.  Timeouts report truncated (not done) so the learner
bootstraps through them.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from color_rl.sim.core import STATE_DIM, SimBatch
from color_rl.sim.gridmap import GridMap
from color_rl.sim.params import DiversityRanges, EnvConfig
from color_rl.sim.reward import Event


class StepBatch(NamedTuple):
    states: np.ndarray        # (N, 32) float32; post-reset rows for finished copies
    rewards: np.ndarray       # (N,) float64
    dones: np.ndarray         # (N,) bool; collision/arrival only
    truncated: np.ndarray     # (N,) bool
    store_states: np.ndarray  # (N, 32) float32; true s' rows for storage
    events: np.ndarray        # (N,) int8


@dataclass
class CopyStats:
    episodes: int = 0
    arrivals: int = 0
    return_sum: float = 0.0

    @property
    def arrival_rate(self) -> float | None:
        return self.arrivals / self.episodes if self.episodes else None


@dataclass
class StatsSnapshot:
    per_copy: list[CopyStats]
    episodes: int
    arrivals: int
    return_sum: float
    recent_returns: list[float] = field(default_factory=list)

    @property
    def arrival_rate(self) -> float | None:
        return self.arrivals / self.episodes if self.episodes else None

    @property
    def mean_return(self) -> float | None:
        return self.return_sum / self.episodes if self.episodes else None


class VecEnv:
    def __init__(self, maps: Sequence[GridMap], n_copies: int,
                 ranges: DiversityRanges | Sequence[DiversityRanges] | None = None,
                 config: EnvConfig | None = None, map_index: Sequence[int] | None = None,
                 auto_reset: bool = True, kernel_backend=None):
        if n_copies < 1:
            raise ValueError("need at least one copy")
        self.n_copies = n_copies
        self.auto_reset = auto_reset
        if map_index is None:
            map_index = [i % len(maps) for i in range(n_copies)]
        if isinstance(ranges, DiversityRanges) or ranges is None:
            ranges = [ranges or DiversityRanges()] * n_copies
        self._batch = SimBatch(maps, map_index, list(ranges), config,
                               kernel_backend=kernel_backend)
        self.map_index = self._batch.map_index
        self._episode_return = np.zeros(n_copies)
        self._stats = [CopyStats() for _ in range(n_copies)]
        self._recent_returns: deque[float] = deque(maxlen=256)
        self._first_episode: list[tuple[Event, float, int] | None] = [None] * n_copies

    # -- lifecycle ----------------------------------------------------------

    def reset_all(self, seed: int) -> np.ndarray:
        """Reset every copy from seeds derived per copy; returns (N, 32) states."""
        streams = np.random.SeedSequence(seed).spawn(self.n_copies)
        states = np.empty((self.n_copies, STATE_DIM), dtype=np.float32)
        for i, ss in enumerate(streams):
            states[i] = self._batch.reset_lane(i, np.random.default_rng(ss))
        self._episode_return[:] = 0.0
        self._first_episode = [None] * self.n_copies
        return states

    def step_batch(self, actions) -> StepBatch:
        out = self._batch.step_all(actions)
        self._episode_return += out.rewards
        states = out.states
        ended = out.dones | out.truncated
        if ended.any():
            states = states.copy()
            for i in np.flatnonzero(ended):
                ret = float(self._episode_return[i])
                event = Event(int(out.events[i]))
                s = self._stats[i]
                s.episodes += 1
                s.return_sum += ret
                if event is Event.ARRIVAL:
                    s.arrivals += 1
                self._recent_returns.append(ret)
                if self._first_episode[i] is None:
                    self._first_episode[i] = (event, ret, int(self._batch.step_count[i]))
                self._episode_return[i] = 0.0
                if self.auto_reset:
                    states[i] = self._batch.reset_lane(i)
        return StepBatch(states, out.rewards, out.dones, out.truncated,
                         out.states, out.events)

    # -- reporting ----------------------------------------------------------

    def snapshot_stats(self, reset: bool = False) -> StatsSnapshot:
        per_copy = [CopyStats(s.episodes, s.arrivals, s.return_sum) for s in self._stats]
        snap = StatsSnapshot(
            per_copy=per_copy,
            episodes=sum(s.episodes for s in per_copy),
            arrivals=sum(s.arrivals for s in per_copy),
            return_sum=sum(s.return_sum for s in per_copy),
            recent_returns=list(self._recent_returns),
        )
        if reset:
            self._stats = [CopyStats() for _ in range(self.n_copies)]
            self._recent_returns.clear()
        return snap

    def first_episode_outcomes(self) -> list[tuple[Event, float, int] | None]:
        """Outcome of each copy's first completed episode since reset_all
        (event, return, steps); None while still running."""
        return list(self._first_episode)

    @property
    def all_first_episodes_done(self) -> bool:
        return all(o is not None for o in self._first_episode)

    @property
    def sim(self) -> SimBatch:
        return self._batch
