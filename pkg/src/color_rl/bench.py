"""Throughput benchmark: random-policy stepping at several vectorization
widths, reported per kernel backend.

RTF (real-time factor) is simulated seconds per wall second, aggregated over
copies; aggregate steps/s is the headline scaling number.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from color_rl import kernels
from color_rl.sim.gridmap import GridMap
from color_rl.sim.params import DiversityRanges, EnvConfig, SimParams
from color_rl.vecenv import VecEnv

_WARMUP_ITERATIONS = 3


@dataclass
class BenchRow:
    backend: str
    n_copies: int
    iterations: int
    wall_s: float
    per_copy_steps: list[int]

    @property
    def total_steps(self) -> int:
        return sum(self.per_copy_steps)

    @property
    def steps_per_s(self) -> float:
        return self.total_steps / self.wall_s

    def rtf(self, control_interval_s: float) -> float:
        return self.total_steps * control_interval_s / self.wall_s

    def to_dict(self, control_interval_s: float) -> dict:
        return {
            "backend": self.backend, "n_copies": self.n_copies,
            "iterations": self.iterations, "total_steps": self.total_steps,
            "wall_s": self.wall_s, "steps_per_s": self.steps_per_s,
            "rtf": self.rtf(control_interval_s),
        }


@dataclass
class BenchReport:
    control_interval_s: float
    rows: list[BenchRow] = field(default_factory=list)

    def row(self, backend: str, n_copies: int) -> BenchRow:
        for r in self.rows:
            if r.backend == backend and r.n_copies == n_copies:
                return r
        raise KeyError(f"no bench row for backend={backend} n={n_copies}")

    def to_dict(self) -> dict:
        return {
            "control_interval_s": self.control_interval_s,
            "rows": [r.to_dict(self.control_interval_s) for r in self.rows],
        }

    def render(self) -> str:
        lines = [f"{'backend':<8} {'copies':>6} {'steps':>10} {'wall_s':>8} "
                 f"{'steps/s':>12} {'RTF':>10}"]
        for r in self.rows:
            lines.append(f"{r.backend:<8} {r.n_copies:>6} {r.total_steps:>10} "
                         f"{r.wall_s:>8.2f} {r.steps_per_s:>12.0f} "
                         f"{r.rtf(self.control_interval_s):>10.1f}")
        return "\n".join(lines)


def run_bench(maps: list[GridMap], duration_s: float, n_list=(1, 16, 64),
              backends=None, config: EnvConfig | None = None,
              nominal: SimParams | None = None, seed: int = 0) -> BenchReport:
    """Step random policies for duration_s wall seconds at each width."""
    if duration_s <= 0:
        raise ValueError("benchmark duration must be positive")
    if not maps:
        raise ValueError("benchmark needs at least one map")
    config = config or EnvConfig()
    nominal = nominal or SimParams()
    ranges = DiversityRanges.around(nominal, 0.0)
    if backends is None:
        backends = kernels.available_backends()
    report = BenchReport(control_interval_s=nominal.control_interval_s)

    for backend in backends:
        for n in n_list:
            env = VecEnv(maps, n, ranges, config, kernel_backend=backend)
            env.reset_all(seed)
            rng = np.random.default_rng(seed)
            n_actions = len(config.action_table)
            for _ in range(_WARMUP_ITERATIONS):
                env.step_batch(rng.integers(0, n_actions, n))
            iterations = 0
            started = time.perf_counter()
            deadline = started + duration_s
            while time.perf_counter() < deadline:
                env.step_batch(rng.integers(0, n_actions, n))
                iterations += 1
            wall = time.perf_counter() - started
            report.rows.append(BenchRow(
                backend=backend, n_copies=n, iterations=iterations,
                wall_s=wall, per_copy_steps=[iterations] * n))
    return report
