"""Greedy-policy evaluation over map sets.

Each map gets episodes_per_map parallel copies; every copy runs exactly one
scored episode.  Parameters stay at their nominal values unless a
randomization fraction is requested.  Timeouts count as failures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from color_rl import net
from color_rl.net import MlpParams
from color_rl.sim.gridmap import GridMap
from color_rl.sim.params import DiversityRanges, EnvConfig, SimParams
from color_rl.sim.reward import Event
from color_rl.vecenv import VecEnv


@dataclass
class MapEval:
    name: str
    episodes: int
    arrivals: int
    collisions: int
    timeouts: int
    mean_return: float
    mean_steps: float

    @property
    def arrival_rate(self) -> float:
        return self.arrivals / self.episodes

    def to_dict(self) -> dict:
        return {
            "name": self.name, "episodes": self.episodes,
            "arrivals": self.arrivals, "collisions": self.collisions,
            "timeouts": self.timeouts, "arrival_rate": self.arrival_rate,
            "mean_return": self.mean_return, "mean_steps": self.mean_steps,
        }


@dataclass
class EvalReport:
    seed: int
    results: list[MapEval] = field(default_factory=list)

    @property
    def episodes(self) -> int:
        return sum(r.episodes for r in self.results)

    @property
    def arrival_rate(self) -> float:
        total = self.episodes
        return sum(r.arrivals for r in self.results) / total if total else 0.0

    @property
    def mean_return(self) -> float:
        total = self.episodes
        if not total:
            return 0.0
        return sum(r.mean_return * r.episodes for r in self.results) / total

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "arrival_rate": self.arrival_rate,
            "mean_return": self.mean_return,
            "episodes": self.episodes,
            "maps": [r.to_dict() for r in self.results],
        }

    def render(self) -> str:
        lines = [f"{'map':<28} {'episodes':>8} {'arrived':>8} {'rate':>6} "
                 f"{'return':>9} {'steps':>7}"]
        for r in self.results:
            lines.append(f"{r.name:<28} {r.episodes:>8} {r.arrivals:>8} "
                         f"{r.arrival_rate:>6.2f} {r.mean_return:>9.2f} "
                         f"{r.mean_steps:>7.1f}")
        lines.append(f"{'pooled':<28} {self.episodes:>8} "
                     f"{sum(r.arrivals for r in self.results):>8} "
                     f"{self.arrival_rate:>6.2f} {self.mean_return:>9.2f}")
        return "\n".join(lines)


def evaluate_params(params: MlpParams, maps: list[GridMap], names: list[str],
                    episodes_per_map: int, seed: int,
                    config: EnvConfig | None = None,
                    nominal: SimParams | None = None,
                    randomize_fraction: float = 0.0,
                    kernel_backend=None) -> EvalReport:
    config = config or EnvConfig()
    nominal = nominal or SimParams()
    ranges = DiversityRanges.around(nominal, randomize_fraction)
    report = EvalReport(seed=seed)
    for mi, (grid_map, name) in enumerate(zip(maps, names)):
        env = VecEnv([grid_map], episodes_per_map, ranges, config,
                     kernel_backend=kernel_backend)
        states = env.reset_all(int(np.random.SeedSequence((seed, mi)).generate_state(1)[0]))
        for _ in range(config.timeout_steps + 1):
            q = net.forward(params, states)
            actions = np.argmax(q, axis=1)
            states = env.step_batch(actions).states
            if env.all_first_episodes_done:
                break
        outcomes = env.first_episode_outcomes()
        if any(o is None for o in outcomes):
            raise RuntimeError("evaluation episodes did not finish within the timeout")
        events = [o[0] for o in outcomes]
        returns = [o[1] for o in outcomes]
        steps = [o[2] for o in outcomes]
        report.results.append(MapEval(
            name=name,
            episodes=episodes_per_map,
            arrivals=sum(e is Event.ARRIVAL for e in events),
            collisions=sum(e is Event.COLLISION for e in events),
            timeouts=sum(e is Event.TIMEOUT for e in events),
            mean_return=float(np.mean(returns)),
            mean_steps=float(np.mean(steps)),
        ))
    return report


def summarize_rates(reports: list[EvalReport]) -> dict:
    """Mean/std of pooled arrival rates across seeds."""
    rates = [r.arrival_rate for r in reports]
    return {
        "per_seed": rates,
        "mean": float(np.mean(rates)) if rates else 0.0,
        "std": float(np.std(rates)) if rates else 0.0,
    }
