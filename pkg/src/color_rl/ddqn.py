"""Double-DQN update rule: pick the bootstrap action with the online network,
evaluate it with the target network."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from color_rl import net
from color_rl.net import AdamState, MlpParams, TrainingDiverged
from color_rl.replay import TransitionBatch


@dataclass(frozen=True)
class DdqnConfig:
    gamma: float = 0.98
    target_sync_period: int = 200  # optimizer steps between hard target syncs
    batch_size: int = 256
    lr: float = 1e-4

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.target_sync_period < 1 or self.batch_size < 1:
            raise ValueError("target_sync_period and batch_size must be positive")


class UpdateStats(NamedTuple):
    loss: float
    mean_abs_td: float
    version: int
    target_synced: bool


def compute_targets(batch: TransitionBatch, online: MlpParams, target: MlpParams,
                    gamma: float) -> np.ndarray:
    """y = r + gamma * (1 - done) * Q_target(s', argmax_a Q_online(s', a)).

    Argmax ties break toward the lowest action index.
    """
    q_online = net.forward(online, batch.next_states)
    best = np.argmax(q_online, axis=1)
    q_target = net.forward(target, batch.next_states)
    rows = np.arange(len(best))
    bootstrap = q_target[rows, best]
    not_done = ~np.asarray(batch.dones, dtype=bool)
    return (np.asarray(batch.rewards, dtype=q_target.dtype)
            + gamma * not_done * bootstrap)


class DdqnLearner:
    """Owns the online/target parameter pair and applies one update per batch."""

    def __init__(self, params: MlpParams, config: DdqnConfig | None = None):
        self.config = config or DdqnConfig()
        self.online = params
        self.target = params.copy()
        self.adam = AdamState.for_params(params, lr=self.config.lr)
        self.update_count = 0

    def update(self, batch: TransitionBatch) -> UpdateStats:
        targets = compute_targets(batch, self.online, self.target, self.config.gamma)
        grads, loss, mean_abs_td = net.backward(
            self.online, batch.states, batch.actions, targets)
        if not math.isfinite(loss):
            raise TrainingDiverged(
                f"non-finite loss {loss!r} at update {self.update_count + 1} "
                f"(parameter version {self.online.version})")
        net.adam_step(self.online, grads, self.adam)
        self.update_count += 1
        synced = self.update_count % self.config.target_sync_period == 0
        if synced:
            net.sync_target(self.online, self.target)
        return UpdateStats(loss, mean_abs_td, self.online.version, synced)
