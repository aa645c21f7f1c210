"""color-rl: vectorized 2D robot navigation simulator plus a partially
decoupled actor/learner DDQN training stack."""

__version__ = "0.1.0"

from color_rl.sim import GridMap, RobotEnv
from color_rl.vecenv import VecEnv

__all__ = ["GridMap", "RobotEnv", "VecEnv", "__version__"]
