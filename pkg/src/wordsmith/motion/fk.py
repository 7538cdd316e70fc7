"""Forward kinematics for planar chains: joint angles to world positions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .skeleton import RootPose, Skeleton


@dataclass
class FkResult:
    """World-frame pose of every link plus the named end-effector map.

    origins/endpoints have shape (..., L, 2); angles (..., L).
    """

    angles: np.ndarray
    origins: np.ndarray
    endpoints: np.ndarray
    end_effectors: dict

    def com_positions(self, skeleton):
        fracs = np.array([l.com for l in skeleton.links])
        return self.origins + fracs[..., None] * (self.endpoints - self.origins)


def fk_arrays(skeleton, root, q):
    """Vectorized FK over any leading batch shape.

    root: (..., 3) as [x, y, theta]; q: (..., J).
    """
    root = np.asarray(root, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if q.shape[-1] != skeleton.joint_count:
        raise ValueError(
            f"q has {q.shape[-1]} entries, skeleton has {skeleton.joint_count} joints"
        )
    batch = np.broadcast_shapes(root.shape[:-1], q.shape[:-1])
    L = len(skeleton.links)
    angles = np.empty(batch + (L,))
    origins = np.empty(batch + (L, 2))
    endpoints = np.empty(batch + (L, 2))

    base_xy = np.broadcast_to(root[..., :2], batch + (2,))
    base_th = np.broadcast_to(root[..., 2], batch)

    jmap = {i: j for j, i in enumerate(skeleton.joint_links)}
    for i, link in enumerate(skeleton.links):
        if link.parent < 0:
            parent_angle = base_th
            att = base_xy
        else:
            p = link.parent
            parent_angle = angles[..., p]
            att = origins[..., p, :] + link.attach * (
                endpoints[..., p, :] - origins[..., p, :]
            )
        ang = parent_angle + link.zero
        if link.joint is not None:
            ang = ang + q[..., jmap[i]]
        angles[..., i] = ang
        origins[..., i, :] = att
        endpoints[..., i, 0] = att[..., 0] + link.length * np.cos(ang)
        endpoints[..., i, 1] = att[..., 1] + link.length * np.sin(ang)

    ee = {name: endpoints[..., idx, :] for name, idx in skeleton.end_effectors.items()}
    return FkResult(angles=angles, origins=origins, endpoints=endpoints, end_effectors=ee)


def fk_positions(skeleton, root, q):
    """FK for a single pose; accepts a RootPose or a length-3 array."""
    if isinstance(root, RootPose):
        root = root.as_array()
    return fk_arrays(skeleton, root, q)


def rod_points(skeleton, fk):
    """World endpoints of each configured virtual rod: (..., n_rods, 2, 2)."""
    pts = []
    for rod in skeleton.rods:
        pa = fk.origins[..., rod.link_a, :] + rod.frac_a * (
            fk.endpoints[..., rod.link_a, :] - fk.origins[..., rod.link_a, :]
        )
        pb = fk.origins[..., rod.link_b, :] + rod.frac_b * (
            fk.endpoints[..., rod.link_b, :] - fk.origins[..., rod.link_b, :]
        )
        pts.append(np.stack([pa, pb], axis=-2))
    if not pts:
        shape = fk.angles.shape[:-1] + (0, 2, 2)
        return np.zeros(shape)
    return np.stack(pts, axis=-3)


def rod_lengths(skeleton, root, q):
    """Current length of each virtual rod."""
    fk = fk_arrays(skeleton, np.asarray(root, dtype=np.float64), q)
    pts = rod_points(skeleton, fk)
    diff = pts[..., 0, :] - pts[..., 1, :]
    return np.linalg.norm(diff, axis=-1)
