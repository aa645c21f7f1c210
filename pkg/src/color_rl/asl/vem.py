"""Per-copy epsilon assignment for vectorized exploration.

Copies are split into an exploiting interval pinned at e_min and an exploring
interval whose epsilons rise linearly to e_max at the last copy.  The
exploring interval shrinks linearly from or_init to or_final copies over
decay_steps interaction steps, so some exploration survives to the end of
training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class VemSchedule:
    n_envs: int
    or_init: int = 16
    or_final: int = 3
    decay_steps: int = 500_000
    e_min: float = 0.01
    e_max: float = 0.8

    def __post_init__(self):
        if not 1 <= self.or_final <= self.or_init <= self.n_envs:
            raise ValueError(
                f"need 1 <= or_final <= or_init <= n_envs, got "
                f"{self.or_final}, {self.or_init}, {self.n_envs}")
        if not 0.0 <= self.e_min <= self.e_max <= 1.0:
            raise ValueError("need 0 <= e_min <= e_max <= 1")
        if self.decay_steps < 1:
            raise ValueError("decay_steps must be positive")

    def exploring_interval(self, t_step: int) -> int:
        """Exploring-copy count at step t; rounds half up."""
        frac = min(t_step / self.decay_steps, 1.0)
        return int(math.floor(self.or_init + (self.or_final - self.or_init) * frac + 0.5))

    def epsilon(self, i: int, t_step: int) -> float:
        if not 0 <= i < self.n_envs:
            raise ValueError(f"copy index {i} out of range [0, {self.n_envs})")
        size = self.exploring_interval(t_step)
        first = self.n_envs - size
        if i < first:
            return self.e_min
        if i == self.n_envs - 1:  # ramp top, exact endpoint
            return self.e_max
        return self.e_min + (self.e_max - self.e_min) * (i - first) / (size - 1)

    def epsilons(self, t_step: int) -> np.ndarray:
        return np.array([self.epsilon(i, t_step) for i in range(self.n_envs)])


def select_actions(q_values: np.ndarray, epsilons: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray:
    """Row-wise epsilon-greedy: random action with probability eps, else the
    argmax (ties to the lowest index)."""
    q_values = np.asarray(q_values)
    n, n_actions = q_values.shape
    explore = rng.random(n) < np.asarray(epsilons)
    randoms = rng.integers(0, n_actions, n)
    greedy = np.argmax(q_values, axis=1)
    return np.where(explore, randoms, greedy)
