from color_rl.asl.loops import METRIC_COLUMNS, Session, actor_loop, learner_loop, start_session
from color_rl.asl.sharer import PublishedModel, Sharer
from color_rl.asl.tfm import TfmConfig, TfmState
from color_rl.asl.vem import VemSchedule, select_actions

__all__ = [
    "METRIC_COLUMNS",
    "PublishedModel",
    "Session",
    "Sharer",
    "TfmConfig",
    "TfmState",
    "VemSchedule",
    "actor_loop",
    "learner_loop",
    "select_actions",
    "start_session",
]
