"""Shipped skeleton presets.

HUMAN-9: torso plus 2-link arms and 2-link legs (the motion source).
ROBOT-D: torso, 2-link arms, and 3-link digitigrade legs whose zigzag
hip-knee-ankle chain deliberately mismatches the human source.  Angle zeros
are chosen so q == 0 is the natural standing pose (feet flat, toes forward).
"""

from __future__ import annotations

import numpy as np

from .fk import fk_positions
from .skeleton import Joint, Link, Rod, RootPose, Skeleton

UPRIGHT = np.pi / 2  # root heading for a standing figure (torso points +y)


def human9_skeleton():
    links = (
        Link("torso", 0.60, -1, joint=None, zero=0.0, mass=10.0, com=0.45, inertia=0.30),
        Link("l_upper_arm", 0.30, 0, joint=Joint(-2.6, 2.6), zero=np.pi, attach=1.0,
             mass=1.0, com=0.5, inertia=0.0075),
        Link("l_forearm", 0.30, 1, joint=Joint(-0.05, 2.8), zero=0.0, attach=1.0,
             mass=0.6, com=0.5, inertia=0.0045),
        Link("r_upper_arm", 0.30, 0, joint=Joint(-2.6, 2.6), zero=np.pi, attach=1.0,
             mass=1.0, com=0.5, inertia=0.0075),
        Link("r_forearm", 0.30, 3, joint=Joint(-0.05, 2.8), zero=0.0, attach=1.0,
             mass=0.6, com=0.5, inertia=0.0045),
        Link("l_thigh", 0.45, 0, joint=Joint(-1.3, 1.3), zero=np.pi, attach=0.0,
             mass=2.5, com=0.5, inertia=0.042),
        Link("l_shin", 0.45, 5, joint=Joint(-2.4, 0.02), zero=0.0, attach=1.0,
             mass=1.5, com=0.5, inertia=0.025),
        Link("r_thigh", 0.45, 0, joint=Joint(-1.3, 1.3), zero=np.pi, attach=0.0,
             mass=2.5, com=0.5, inertia=0.042),
        Link("r_shin", 0.45, 7, joint=Joint(-2.4, 0.02), zero=0.0, attach=1.0,
             mass=1.5, com=0.5, inertia=0.025),
    )
    ee = {"left_hand": 2, "right_hand": 4, "left_foot": 6, "right_foot": 8}
    return Skeleton(links=links, end_effectors=ee, name="human9")


def robot_d_skeleton():
    # Digitigrade leg: thigh slopes down-forward, shin down-backward, toe
    # segment flat on the ground at rest.  The zero offsets close the chain;
    # the shin angle is picked so the foot span straddles the standing CoM.
    thigh_zero = np.pi + 0.55
    shin_zero = -1.334
    foot_zero = 2.0 * np.pi - (UPRIGHT + thigh_zero + shin_zero)
    links = (
        Link("torso", 0.50, -1, joint=None, zero=0.0, mass=12.0, com=0.45, inertia=0.25),
        Link("l_upper_arm", 0.25, 0, joint=Joint(-2.6, 2.6), zero=np.pi, attach=1.0,
             mass=0.8, com=0.5, inertia=0.004),
        Link("l_forearm", 0.25, 1, joint=Joint(-0.05, 2.8), zero=0.0, attach=1.0,
             mass=0.5, com=0.5, inertia=0.0026),
        Link("r_upper_arm", 0.25, 0, joint=Joint(-2.6, 2.6), zero=np.pi, attach=1.0,
             mass=0.8, com=0.5, inertia=0.004),
        Link("r_forearm", 0.25, 3, joint=Joint(-0.05, 2.8), zero=0.0, attach=1.0,
             mass=0.5, com=0.5, inertia=0.0026),
        Link("l_thigh", 0.35, 0, joint=Joint(-1.0, 1.2), zero=thigh_zero, attach=0.0,
             mass=2.0, com=0.5, inertia=0.020),
        Link("l_shin", 0.35, 5, joint=Joint(-0.9, 0.9), zero=shin_zero, attach=1.0,
             mass=1.2, com=0.5, inertia=0.012),
        Link("l_foot", 0.18, 6, joint=Joint(-0.8, 0.8), zero=foot_zero, attach=1.0,
             mass=0.3, com=0.5, inertia=0.0008),
        Link("r_thigh", 0.35, 0, joint=Joint(-1.0, 1.2), zero=thigh_zero, attach=0.0,
             mass=2.0, com=0.5, inertia=0.020),
        Link("r_shin", 0.35, 8, joint=Joint(-0.9, 0.9), zero=shin_zero, attach=1.0,
             mass=1.2, com=0.5, inertia=0.012),
        Link("r_foot", 0.18, 9, joint=Joint(-0.8, 0.8), zero=foot_zero, attach=1.0,
             mass=0.3, com=0.5, inertia=0.0008),
    )
    ee = {"left_hand": 2, "right_hand": 4, "left_foot": 7, "right_foot": 10}
    # rods land near the ankle so they couple knee/thigh motion without
    # overpowering the ankle servo that keeps the foot flat
    rods = (
        Rod(5, 0.5, 7, 0.15),  # left: thigh mid to foot near ankle
        Rod(6, 0.5, 7, 0.3),   # left: shin mid to foot
        Rod(8, 0.5, 10, 0.15),  # right
        Rod(9, 0.5, 10, 0.3),
    )
    return Skeleton(links=links, end_effectors=ee, rods=rods, name="robot_d")


def standing_root(skeleton, ground_links=None):
    """Root pose that places the lowest point of the chain on the ground."""
    probe = fk_positions(skeleton, RootPose(0.0, 0.0, UPRIGHT), np.zeros(skeleton.joint_count))
    pts = np.concatenate([probe.origins, probe.endpoints], axis=0)
    if ground_links is not None:
        pts = np.concatenate(
            [probe.origins[ground_links], probe.endpoints[ground_links]], axis=0
        )
    return RootPose(0.0, -float(pts[:, 1].min()), UPRIGHT)


def skeleton_by_name(name):
    if name == "human9":
        return human9_skeleton()
    if name == "robot_d":
        return robot_d_skeleton()
    raise KeyError(f"unknown skeleton preset {name!r}")
