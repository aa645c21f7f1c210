from color_rl.sim.env import (
    EpisodeTerminated,
    Event,
    LidarConfig,
    RobotEnv,
    RobotState,
    StepOutcome,
    check_collision,
    lidar_scan,
)
from color_rl.sim.gridmap import GridMap, MapError
from color_rl.sim.params import DiversityRanges, EnvConfig, SimParams

__all__ = [
    "DiversityRanges",
    "EnvConfig",
    "EpisodeTerminated",
    "Event",
    "GridMap",
    "LidarConfig",
    "MapError",
    "RobotEnv",
    "RobotState",
    "SimParams",
    "StepOutcome",
    "check_collision",
    "lidar_scan",
]
