"""Robot presets for simulation: skeleton plus dynamics parameters."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..motion.presets import robot_d_skeleton, standing_root
from ..motion.skeleton import RootPose, Skeleton


@dataclass
class RobotSpec:
    """Everything the simulator needs to run one robot."""

    skeleton: Skeleton
    kp: np.ndarray
    kd: np.ndarray
    torque_limit: np.ndarray
    contacts: tuple          # (link_index, fraction along link) ground points
    rest_root: RootPose
    rest_q: np.ndarray
    terminate_height: float  # fall threshold on root y
    name: str = "robot"

    def __post_init__(self):
        J = self.skeleton.joint_count
        self.kp = np.broadcast_to(np.asarray(self.kp, dtype=np.float64), (J,)).copy()
        self.kd = np.broadcast_to(np.asarray(self.kd, dtype=np.float64), (J,)).copy()
        self.torque_limit = np.broadcast_to(
            np.asarray(self.torque_limit, dtype=np.float64), (J,)
        ).copy()
        self.rest_q = np.broadcast_to(
            np.asarray(self.rest_q, dtype=np.float64), (J,)
        ).copy()

    def to_dict(self):
        return {
            "name": self.name,
            "skeleton": self.skeleton.to_dict(),
            "kp": self.kp.tolist(),
            "kd": self.kd.tolist(),
            "torque_limit": self.torque_limit.tolist(),
            "contacts": [[int(l), float(f)] for l, f in self.contacts],
            "rest_root": [self.rest_root.x, self.rest_root.y, self.rest_root.theta],
            "rest_q": self.rest_q.tolist(),
            "terminate_height": self.terminate_height,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            skeleton=Skeleton.from_dict(d["skeleton"]),
            kp=np.array(d["kp"]),
            kd=np.array(d["kd"]),
            torque_limit=np.array(d["torque_limit"]),
            contacts=tuple((int(l), float(f)) for l, f in d["contacts"]),
            rest_root=RootPose(*d["rest_root"]),
            rest_q=np.array(d["rest_q"]),
            terminate_height=d["terminate_height"],
            name=d.get("name", "robot"),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def robot_d_spec():
    """The digitigrade biped with desk-tuned gains.

    Per-joint order matches the skeleton's revolute joints: l_upper_arm,
    l_forearm, r_upper_arm, r_forearm, l_thigh, l_shin, l_foot, r_thigh,
    r_shin, r_foot.
    """
    sk = robot_d_skeleton()
    # standing needs the series stiffness of hip/knee/ankle servos plus the
    # ground spring to beat the inverted-pendulum gravity stiffness
    # (m g h_com ~ 100 N m/rad); these gains leave a comfortable margin
    kp = np.array([30.0, 20.0, 30.0, 20.0, 240.0, 240.0, 150.0, 240.0, 240.0, 150.0])
    kd = np.array([1.5, 0.8, 1.5, 0.8, 10.0, 8.0, 3.0, 10.0, 8.0, 3.0])
    torque = np.array([30.0, 20.0, 30.0, 20.0, 150.0, 150.0, 80.0, 150.0, 150.0, 80.0])
    l_foot = sk.link_index("l_foot")
    r_foot = sk.link_index("r_foot")
    contacts = ((l_foot, 0.0), (l_foot, 1.0), (r_foot, 0.0), (r_foot, 1.0))
    root = standing_root(sk)
    return RobotSpec(
        skeleton=sk,
        kp=kp,
        kd=kd,
        torque_limit=torque,
        contacts=contacts,
        rest_root=root,
        rest_q=np.zeros(sk.joint_count),
        terminate_height=0.6 * root.y,
        name="robot_d",
    )
