"""Time feedback between data collection and optimization.

Both loops report how long one of their iterations takes; the balance signal
xi = rho * b_period - v_period (rho = n_envs * tps / batch) decides who
sleeps: the actor for xi seconds when positive, otherwise the learner for
-xi / rho.  Holding that balance pins the replayed-transitions-per-step ratio
near the configured tps.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TfmConfig:
    n_envs: int
    tps: float
    batch_size: int
    warmup_samples: int = 10   # period reports per side before sleeping starts
    max_sleep_s: float = 1.0   # bounds stalls from pathological measurements

    def __post_init__(self):
        if self.n_envs < 1 or self.batch_size < 1 or self.tps <= 0:
            raise ValueError("n_envs, batch_size must be >= 1 and tps > 0")

    @property
    def rho(self) -> float:
        return self.n_envs * self.tps / self.batch_size


@dataclass
class TfmState:
    """Exponentially averaged loop periods; each is written by one loop only."""

    ema_factor: float = 0.1
    v_period_s: float | None = None
    b_period_s: float | None = None
    v_count: int = 0
    b_count: int = 0

    def record_interaction(self, seconds: float) -> None:
        self.v_period_s = self._ema(self.v_period_s, seconds)
        self.v_count += 1

    def record_optimization(self, seconds: float) -> None:
        self.b_period_s = self._ema(self.b_period_s, seconds)
        self.b_count += 1

    def _ema(self, prev: float | None, sample: float) -> float:
        if prev is None:
            return sample
        return (1.0 - self.ema_factor) * prev + self.ema_factor * sample

    def ready(self, cfg: TfmConfig) -> bool:
        return (self.v_count >= cfg.warmup_samples
                and self.b_count >= cfg.warmup_samples)

    def compute_xi(self, cfg: TfmConfig) -> float:
        """Balance signal in seconds; positive means the actor is ahead."""
        if self.v_period_s is None or self.b_period_s is None:
            raise ValueError("both loop periods must be recorded before computing xi")
        return cfg.rho * self.b_period_s - self.v_period_s

    def actor_sleep(self, cfg: TfmConfig) -> float:
        """Seconds the actor should sleep this iteration (0 when not its turn)."""
        if not self.ready(cfg):
            return 0.0
        xi = self.compute_xi(cfg)
        return min(xi, cfg.max_sleep_s) if xi > 0 else 0.0

    def learner_sleep(self, cfg: TfmConfig) -> float:
        """Seconds the learner should sleep this iteration (0 when not its turn)."""
        if not self.ready(cfg):
            return 0.0
        xi = self.compute_xi(cfg)
        return min(-xi / cfg.rho, cfg.max_sleep_s) if xi <= 0 else 0.0
