"""Clip retargeting: source end-effector tracks to robot joint trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..motion import MotionClip
from ..motion.fk import fk_arrays
from .ik import FrameResult, IkConfig, IkProblem, solve_frame


class MappingError(KeyError):
    """Source and robot end-effector sets do not line up."""


@dataclass
class RetargetConfig:
    ik: IkConfig = field(default_factory=IkConfig)
    warm_start: bool = True
    scale_root_height: bool = True
    root_height_offset: float = 0.0
    root_height_scale: float | None = None  # None = use the leg-limb ratio


@dataclass
class RetargetReport:
    frames: list
    limb_scales: dict
    mean_tracking_error: float
    max_tracking_error: float
    mean_iterations: float
    mean_feasibility: float

    def to_dict(self):
        return {
            "limb_scales": self.limb_scales,
            "mean_tracking_error": self.mean_tracking_error,
            "max_tracking_error": self.max_tracking_error,
            "mean_iterations": self.mean_iterations,
            "mean_feasibility": self.mean_feasibility,
            "frames": [
                {
                    "tracking_error": f.tracking_error,
                    "feasibility": f.feasibility,
                    "iterations": f.iterations,
                    "converged": f.converged,
                }
                for f in self.frames
            ],
        }


def limb_length(skeleton, ee_name):
    """Total length of the jointed chain from the base to the end effector."""
    idx = skeleton.end_effectors[ee_name]
    total = 0.0
    k = idx
    while k >= 0:
        link = skeleton.links[k]
        if link.joint is not None:
            total += link.length
        k = link.parent
    return total


def relative_ee_tracks(clip):
    """Per-frame end-effector positions in the root frame (rotated, centered)."""
    fk = fk_arrays(clip.skeleton, clip.roots, clip.q)
    th = clip.roots[:, 2]
    c, s = np.cos(-th), np.sin(-th)
    out = {}
    for name, pos in fk.end_effectors.items():
        d = pos - clip.roots[:, :2]
        out[name] = np.stack([c * d[:, 0] - s * d[:, 1], s * d[:, 0] + c * d[:, 1]], axis=1)
    return out


def rest_ee_positions(skeleton):
    """Root-frame end-effector positions in the canonical standing pose."""
    from ..motion.presets import UPRIGHT

    fk = fk_arrays(skeleton, np.array([0.0, 0.0, UPRIGHT]), np.zeros(skeleton.joint_count))
    c, s = np.cos(-UPRIGHT), np.sin(-UPRIGHT)
    out = {}
    for name, p in fk.end_effectors.items():
        out[name] = np.array([c * p[0] - s * p[1], s * p[0] + c * p[1]])
    return out


def retarget_clip(source, robot, config=None):
    """Map a source clip onto the robot skeleton via per-frame IK.

    Targets are root-relative end-effector positions anchored at each
    skeleton's standing pose: the robot tracks its own rest position plus
    the source's excursion from rest, scaled per limb by the robot/source
    limb-length ratio.  Frames are solved sequentially; with warm starting
    each frame initializes from the previous solution.
    Returns (robot clip, RetargetReport).
    """
    config = config if config is not None else RetargetConfig()
    src_ee = set(source.skeleton.end_effectors)
    rob_ee = set(robot.end_effectors)
    if src_ee != rob_ee:
        raise MappingError(
            f"end-effector names differ: source {sorted(src_ee)} vs robot {sorted(rob_ee)}"
        )

    scales = {}
    for name in sorted(rob_ee):
        src_len = limb_length(source.skeleton, name)
        rob_len = limb_length(robot, name)
        if src_len <= 0:
            raise MappingError(f"source limb {name} has zero length")
        scales[name] = rob_len / src_len

    tracks = relative_ee_tracks(source)
    src_rest = rest_ee_positions(source.skeleton)
    rob_rest = rest_ee_positions(robot)
    problem = IkProblem(robot, config.ik)
    rest = np.zeros(robot.joint_count)
    problem.rod_rest_lengths(rest)

    leg_scale = np.mean([scales[n] for n in scales if "foot" in n] or [1.0])
    h_scale = (
        config.root_height_scale
        if config.root_height_scale is not None
        else (leg_scale if config.scale_root_height else 1.0)
    )

    frames = []
    qs = np.zeros((source.num_frames, robot.joint_count))
    q_prev = rest.copy()
    damping = None
    for t in range(source.num_frames):
        targets = {
            n: rob_rest[n] + scales[n] * (tracks[n][t] - src_rest[n]) for n in scales
        }
        q_init = q_prev if (config.warm_start and t > 0) else rest
        res = solve_frame(
            problem,
            targets,
            q_init,
            q_prev if t > 0 else None,
            damping_init=damping if config.warm_start else None,
        )
        qs[t] = res.q
        frames.append(res)
        q_prev = res.q
        damping = res.final_damping

    from ..motion.presets import standing_root

    src_rest_y = standing_root(source.skeleton).y
    rob_rest_y = standing_root(robot).y
    roots = source.roots.copy()
    roots[:, 1] = rob_rest_y + h_scale * (roots[:, 1] - src_rest_y) + config.root_height_offset
    out = MotionClip(robot, source.dt, roots, qs)
    report = RetargetReport(
        frames=frames,
        limb_scales=scales,
        mean_tracking_error=float(np.mean([f.tracking_error for f in frames])),
        max_tracking_error=float(np.max([f.tracking_error for f in frames])),
        mean_iterations=float(np.mean([f.iterations for f in frames])),
        mean_feasibility=float(np.mean([f.feasibility for f in frames])),
    )
    return out, report
