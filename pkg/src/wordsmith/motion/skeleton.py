"""Planar kinematic-chain description shared by source and robot morphologies.

Every link is a segment of fixed length hanging off its parent (or the
floating base for ``parent == -1``).  A link either articulates through a
revolute joint or is welded rigidly; the joint-angle vector ``q`` covers the
revolute joints in link order.  ``zero`` is the joint's rest offset so that
``q == 0`` is the natural standing pose.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def wrap_angle(theta):
    """Wrap angle(s) to (-pi, pi]; values already inside pass through exactly."""
    theta = np.asarray(theta, dtype=np.float64)
    r = theta - 2.0 * np.pi * np.round(theta / (2.0 * np.pi))
    r = np.where(r <= -np.pi, r + 2.0 * np.pi, r)
    return r if r.ndim else float(r)


@dataclass(frozen=True)
class Joint:
    """Revolute joint limits [rad] relative to the link's zero offset."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"joint limits lo={self.lo} must be < hi={self.hi}")


@dataclass(frozen=True)
class Link:
    """One rigid segment.

    attach: joint location as a fraction along the parent link (0 = parent
        origin, 1 = parent tip); base-attached links sit at the base origin.
    com: center-of-mass position as a fraction along this link.
    """

    name: str
    length: float
    parent: int
    joint: Joint | None = None
    zero: float = 0.0
    attach: float = 1.0
    mass: float = 1.0
    com: float = 0.5
    inertia: float = 0.01

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError(f"link {self.name}: length must be > 0")
        if self.mass <= 0.0:
            raise ValueError(f"link {self.name}: mass must be > 0")
        if not 0.0 <= self.attach <= 1.0:
            raise ValueError(f"link {self.name}: attach fraction out of [0,1]")


@dataclass(frozen=True)
class Rod:
    """Virtual rod between two points on different links (closed-chain proxy).

    ``rest_length`` of None means "measure it in the rest pose".
    """

    link_a: int
    frac_a: float
    link_b: int
    frac_b: float
    rest_length: float | None = None


@dataclass(frozen=True)
class RootPose:
    """Floating-base pose: 2D position [m] and heading angle [rad]."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", float(wrap_angle(self.theta)))

    def as_array(self):
        return np.array([self.x, self.y, self.theta])


@dataclass(frozen=True)
class Skeleton:
    """Kinematic tree rooted at a floating base.

    ``end_effectors`` names the tracked link tips (e.g. hands and feet).
    """

    links: tuple[Link, ...]
    end_effectors: dict[str, int]
    rods: tuple[Rod, ...] = ()
    name: str = "skeleton"
    joint_links: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if not self.links:
            raise ValueError("skeleton needs at least one link")
        for i, link in enumerate(self.links):
            if not -1 <= link.parent < i:
                raise ValueError(
                    f"link {link.name}: parent {link.parent} must precede it"
                )
        if not self.end_effectors:
            raise ValueError("end-effector set must be nonempty")
        for name, idx in self.end_effectors.items():
            if not 0 <= idx < len(self.links):
                raise ValueError(f"end effector {name}: bad link index {idx}")
        object.__setattr__(
            self,
            "joint_links",
            tuple(i for i, l in enumerate(self.links) if l.joint is not None),
        )

    @property
    def joint_count(self):
        return len(self.joint_links)

    @property
    def joint_limits(self):
        lo = np.array([self.links[i].joint.lo for i in self.joint_links])
        hi = np.array([self.links[i].joint.hi for i in self.joint_links])
        return lo, hi

    def joint_index(self, link_name):
        """Index into q of the named link's joint."""
        for j, i in enumerate(self.joint_links):
            if self.links[i].name == link_name:
                return j
        raise KeyError(f"no revolute joint on link {link_name!r}")

    def link_index(self, link_name):
        for i, l in enumerate(self.links):
            if l.name == link_name:
                return i
        raise KeyError(f"no link named {link_name!r}")

    def clamp(self, q):
        lo, hi = self.joint_limits
        return np.clip(q, lo, hi)

    # -- serialization --------------------------------------------------------

    def to_dict(self):
        return {
            "name": self.name,
            "links": [
                {
                    "name": l.name,
                    "length": l.length,
                    "parent": l.parent,
                    "joint": None if l.joint is None else {"lo": l.joint.lo, "hi": l.joint.hi},
                    "zero": l.zero,
                    "attach": l.attach,
                    "mass": l.mass,
                    "com": l.com,
                    "inertia": l.inertia,
                }
                for l in self.links
            ],
            "end_effectors": dict(self.end_effectors),
            "rods": [
                {
                    "link_a": r.link_a,
                    "frac_a": r.frac_a,
                    "link_b": r.link_b,
                    "frac_b": r.frac_b,
                    "rest_length": r.rest_length,
                }
                for r in self.rods
            ],
        }

    @classmethod
    def from_dict(cls, d):
        links = tuple(
            Link(
                name=ld["name"],
                length=ld["length"],
                parent=ld["parent"],
                joint=None if ld.get("joint") is None else Joint(**ld["joint"]),
                zero=ld.get("zero", 0.0),
                attach=ld.get("attach", 1.0),
                mass=ld.get("mass", 1.0),
                com=ld.get("com", 0.5),
                inertia=ld.get("inertia", 0.01),
            )
            for ld in d["links"]
        )
        rods = tuple(Rod(**rd) for rd in d.get("rods", []))
        return cls(
            links=links,
            end_effectors={k: int(v) for k, v in d["end_effectors"].items()},
            rods=rods,
            name=d.get("name", "skeleton"),
        )

    def structure_hash(self):
        """Stable hash of the kinematic structure (for checkpoint compatibility)."""
        import hashlib
        import json

        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]
