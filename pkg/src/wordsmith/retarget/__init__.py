from .ik import FrameResult, IkConfig, IkProblem, ik_objective, solve_frame
from .retarget import (
    MappingError,
    RetargetConfig,
    RetargetReport,
    limb_length,
    relative_ee_tracks,
    retarget_clip,
)

__all__ = [
    "FrameResult",
    "IkConfig",
    "IkProblem",
    "MappingError",
    "RetargetConfig",
    "RetargetReport",
    "ik_objective",
    "limb_length",
    "relative_ee_tracks",
    "retarget_clip",
    "solve_frame",
]
