"""Run configuration: flat ``key = value`` text with section headers.

Unknown sections or keys are rejected.  ``dump_config`` writes every field
with its materialized value, so the echoed file reproduces the run exactly.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import get_type_hints

from color_rl.asl.tfm import TfmConfig
from color_rl.asl.vem import VemSchedule
from color_rl.ddqn import DdqnConfig
from color_rl.sim.params import DiversityRanges, EnvConfig, LidarConfig, SimParams

MODES = ("grey", "color", "custom")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class RunSection:
    mode: str = "color"
    maps: tuple[str, ...] = ()
    eval_maps: tuple[str, ...] = ()
    out_dir: str = "runs"
    seeds: tuple[int, ...] = (0,)


@dataclass
class EnvSection:
    n_copies: int = 16
    timeout_steps: int = 1000
    robot_radius_cm: float = 9.0
    lidar_beams: int = 27
    lidar_fov_deg: float = 270.0
    lidar_max_range_cm: float = 300.0
    max_planning_dist_cm: float = 0.0  # 0 -> map diagonal
    obstacle_penalty_range_cm: float = 30.0
    k: float = 0.6
    control_interval_s: float = 0.1
    control_delay_steps: int = 1
    v_linear_max_cm_s: float = 18.0
    v_angular_max_rad_s: float = 1.0
    lidar_noise_std_cm: float = 1.0
    diversity: float = 0.3


@dataclass
class TrainSection:
    t_total: int = 300_000
    tps: float = 256.0
    batch_size: int = 256
    learn_start: int = 30_000
    upload_period: int = 50
    buffer_capacity: int = 1_000_000
    eval_cadence_b_steps: int = 5000
    eval_episodes_per_map: int = 4
    metrics_interval_s: float = 2.0


@dataclass
class VemSection:
    or_init: int = 16
    or_final: int = 3
    decay_steps: int = 500_000
    e_min: float = 0.01
    e_max: float = 0.8


@dataclass
class TfmSection:
    ema_factor: float = 0.1
    warmup_samples: int = 10
    max_sleep_s: float = 1.0


@dataclass
class DdqnSection:
    gamma: float = 0.98
    lr: float = 1e-4
    target_sync_period: int = 200


_SECTIONS = {
    "run": RunSection,
    "env": EnvSection,
    "train": TrainSection,
    "vem": VemSection,
    "tfm": TfmSection,
    "ddqn": DdqnSection,
}


@dataclass
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    env: EnvSection = field(default_factory=EnvSection)
    train: TrainSection = field(default_factory=TrainSection)
    vem: VemSection = field(default_factory=VemSection)
    tfm: TfmSection = field(default_factory=TfmSection)
    ddqn: DdqnSection = field(default_factory=DdqnSection)

    # -- derived pieces ------------------------------------------------------

    def env_config(self) -> EnvConfig:
        e = self.env
        return EnvConfig(
            robot_radius_cm=e.robot_radius_cm,
            timeout_steps=e.timeout_steps,
            max_planning_dist_cm=e.max_planning_dist_cm,
            obstacle_penalty_range_cm=e.obstacle_penalty_range_cm,
            lidar=LidarConfig(n_beams=e.lidar_beams,
                              fov_rad=math.radians(e.lidar_fov_deg),
                              max_range_cm=e.lidar_max_range_cm),
        )

    def nominal_params(self) -> SimParams:
        e = self.env
        return SimParams(e.k, e.control_interval_s, e.control_delay_steps,
                         e.v_linear_max_cm_s, e.v_angular_max_rad_s,
                         e.lidar_noise_std_cm)

    def diversity_fraction(self) -> float:
        return 0.0 if self.run.mode == "grey" else self.env.diversity

    def ranges(self) -> DiversityRanges:
        return DiversityRanges.around(self.nominal_params(),
                                      self.diversity_fraction())

    def vem_schedule(self) -> VemSchedule:
        v = self.vem
        return VemSchedule(self.env.n_copies, v.or_init, v.or_final,
                           v.decay_steps, v.e_min, v.e_max)

    def tfm_config(self) -> TfmConfig:
        return TfmConfig(self.env.n_copies, self.train.tps,
                         self.train.batch_size, self.tfm.warmup_samples,
                         self.tfm.max_sleep_s)

    def ddqn_config(self) -> DdqnConfig:
        d = self.ddqn
        return DdqnConfig(d.gamma, d.target_sync_period, self.train.batch_size, d.lr)

    def train_map_paths(self) -> tuple[str, ...]:
        if self.run.mode == "grey":
            return self.run.maps[:1]
        return self.run.maps

    def validate(self) -> "RunConfig":
        if self.run.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.run.mode!r}")
        if self.env.n_copies < 1:
            raise ConfigError("n_copies must be >= 1")
        if self.train.t_total < self.env.n_copies:
            raise ConfigError("t_total must cover at least one batched iteration")
        if self.train.batch_size > self.train.buffer_capacity:
            raise ConfigError("batch_size cannot exceed buffer_capacity")
        if self.train.upload_period < 1:
            raise ConfigError("upload_period must be >= 1")
        if self.train.learn_start < 0 or self.train.eval_cadence_b_steps < 0:
            raise ConfigError("learn_start and eval_cadence_b_steps must be >= 0")
        if not self.run.seeds:
            raise ConfigError("at least one seed is required")
        # constructing the derived objects runs their own validators
        try:
            self.nominal_params()
            self.ranges()
            self.vem_schedule()
            self.tfm_config()
            self.ddqn_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self


def _convert(raw: str, typ, key: str):
    raw = raw.strip()
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if typ is str:
            return raw
        if typ == tuple[int, ...]:
            return tuple(int(v) for v in raw.split(",") if v.strip()) if raw else ()
        if typ == tuple[str, ...]:
            return tuple(v.strip() for v in raw.split(",") if v.strip()) if raw else ()
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc
    raise ConfigError(f"unsupported config field type for {key}: {typ}")


def loads(text: str, base_dir: Path | None = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    cfg = RunConfig()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        target = getattr(cfg, section)
        hints = get_type_hints(type(target))
        known = {f.name for f in fields(target)}
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            setattr(target, key, _convert(raw, hints[key], f"[{section}] {key}"))

    if base_dir is not None:
        cfg.run.maps = tuple(str((base_dir / p).resolve()) if not Path(p).is_absolute()
                             else p for p in cfg.run.maps)
        cfg.run.eval_maps = tuple(str((base_dir / p).resolve()) if not Path(p).is_absolute()
                                  else p for p in cfg.run.eval_maps)
    return cfg.validate()


def load_config(path) -> RunConfig:
    path = Path(path)
    return loads(path.read_text(), base_dir=path.parent)


def _format(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def dump_config(cfg: RunConfig) -> str:
    out = io.StringIO()
    for section, cls in _SECTIONS.items():
        out.write(f"[{section}]\n")
        target = getattr(cfg, section)
        for f in fields(cls):
            out.write(f"{f.name} = {_format(getattr(target, f.name))}\n")
        out.write("\n")
    return out.getvalue()


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(dump_config(cfg))
