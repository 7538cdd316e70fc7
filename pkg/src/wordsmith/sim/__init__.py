from .dynamics import (
    SimConfig,
    SimDiverged,
    SimModel,
    SimState,
    VecState,
    pd_torque,
    step,
    step_batch,
)
from .observation import (
    REFERENCE_3D_LAYOUT,
    ObservationLayout,
    build_observation,
    build_observation_batch,
    ee_root_relative,
    observation_layout,
)
from .env import EnvPool, EpisodeParams, clip_state, randomize_episode
from .robot import RobotSpec, robot_d_spec

__all__ = [
    "EnvPool",
    "EpisodeParams",
    "ObservationLayout",
    "REFERENCE_3D_LAYOUT",
    "RobotSpec",
    "SimConfig",
    "SimDiverged",
    "SimModel",
    "SimState",
    "VecState",
    "build_observation",
    "build_observation_batch",
    "clip_state",
    "ee_root_relative",
    "observation_layout",
    "pd_torque",
    "randomize_episode",
    "robot_d_spec",
    "step",
    "step_batch",
]
