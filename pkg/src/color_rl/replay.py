"""Fixed-capacity FIFO transition store with batched append and uniform sampling.

Column-wise contiguous arrays per field.  One appender thread and one sampler
thread are supported: a short internal lock makes each batched append and each
sample read atomic with respect to the other, so sampled rows are never torn
and never come from unwritten slots.
"""

from __future__ import annotations

import threading
from typing import NamedTuple

import numpy as np

from color_rl.sim.core import STATE_DIM


class BufferNotReady(RuntimeError):
    """Sampling was requested before enough transitions were stored."""


class TransitionBatch(NamedTuple):
    states: np.ndarray       # (B, state_dim) float32
    actions: np.ndarray      # (B,) int64
    rewards: np.ndarray      # (B,) float32
    next_states: np.ndarray  # (B, state_dim) float32
    dones: np.ndarray        # (B,) bool


class ReplayBuffer:
    def __init__(self, capacity: int = 1_000_000, state_dim: int = STATE_DIM):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._s = np.zeros((capacity, state_dim), dtype=np.float32)
        self._a = np.zeros(capacity, dtype=np.int64)
        self._r = np.zeros(capacity, dtype=np.float32)
        self._s2 = np.zeros((capacity, state_dim), dtype=np.float32)
        self._done = np.zeros(capacity, dtype=bool)
        self._cursor = 0
        self._size = 0
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return self._size

    def append_batch(self, states, actions, rewards, next_states, dones) -> None:
        states = np.asarray(states, dtype=np.float32)
        n = states.shape[0]
        if n > self.capacity:
            raise ValueError(f"batch of {n} exceeds capacity {self.capacity}")
        actions = np.asarray(actions, dtype=np.int64)
        rewards = np.asarray(rewards, dtype=np.float32)
        next_states = np.asarray(next_states, dtype=np.float32)
        dones = np.asarray(dones, dtype=bool)
        if not (len(actions) == len(rewards) == len(next_states) == len(dones) == n):
            raise ValueError("transition fields have mismatched lengths")
        with self._lock:
            idx = (self._cursor + np.arange(n)) % self.capacity
            self._s[idx] = states
            self._a[idx] = actions
            self._r[idx] = rewards
            self._s2[idx] = next_states
            self._done[idx] = dones
            self._cursor = int((self._cursor + n) % self.capacity)
            self._size = min(self._size + n, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> TransitionBatch:
        """Uniform with replacement over the filled slots; returns copies."""
        with self._lock:
            size = self._size
            if size < batch_size:
                raise BufferNotReady(
                    f"buffer holds {size} transitions, need {batch_size}")
            idx = rng.integers(0, size, batch_size)
            return TransitionBatch(
                self._s[idx].copy(), self._a[idx].copy(), self._r[idx].copy(),
                self._s2[idx].copy(), self._done[idx].copy())

    def snapshot(self) -> TransitionBatch:
        """All stored transitions in storage order (testing/diagnostics)."""
        with self._lock:
            n = self._size
            return TransitionBatch(
                self._s[:n].copy(), self._a[:n].copy(), self._r[:n].copy(),
                self._s2[:n].copy(), self._done[:n].copy())
