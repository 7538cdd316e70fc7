"""Observation assembly with a named-slice layout descriptor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..motion.fk import fk_arrays


@dataclass(frozen=True)
class ObservationLayout:
    """Ordered (name, width) slices describing one flat observation vector."""

    parts: tuple

    @property
    def dim(self):
        return sum(w for _, w in self.parts)

    def slices(self):
        out = {}
        off = 0
        for name, w in self.parts:
            out[name] = slice(off, off + w)
            off += w
        return out

    def to_dict(self):
        return {"parts": [[n, int(w)] for n, w in self.parts], "dim": self.dim}


# the 3D reference layout kept as documentation of the full-scale scheme:
# root height, orientation in normal-tangent encoding, root linear and
# angular velocity, joint positions/velocities, and four 3D end effectors
REFERENCE_3D_LAYOUT = ObservationLayout(
    parts=(
        ("root_height", 1),
        ("root_orientation_normal_tangent", 6),
        ("root_linear_velocity", 3),
        ("root_angular_velocity", 3),
        ("joint_positions", 22),
        ("joint_velocities", 22),
        ("end_effector_positions", 12),
    )
)


def observation_layout(skeleton):
    """Planar analogue of the reference layout for a concrete skeleton."""
    J = skeleton.joint_count
    E = len(skeleton.end_effectors)
    return ObservationLayout(
        parts=(
            ("root_height", 1),
            ("root_orientation_cos_sin", 2),
            ("root_linear_velocity", 2),
            ("root_angular_velocity", 1),
            ("joint_positions", J),
            ("joint_velocities", J),
            ("end_effector_positions", 2 * E),
        )
    )


def ee_root_relative(skeleton, root, q):
    """End-effector positions in the root frame, batched: (N, 2E).

    FK runs with the root position zeroed so the result is exactly
    independent of where the robot stands in the world.
    """
    root0 = np.array(root, dtype=np.float64)
    root0[..., :2] = 0.0
    fk = fk_arrays(skeleton, root0, q)
    th = root0[..., 2]
    c, s = np.cos(-th), np.sin(-th)
    cols = []
    for name in sorted(skeleton.end_effectors):
        d = fk.end_effectors[name]
        cols.append(c * d[..., 0] - s * d[..., 1])
        cols.append(s * d[..., 0] + c * d[..., 1])
    return np.stack(cols, axis=-1)


def build_observation_batch(root, root_vel, q, qd, skeleton, rng_list=None, noise_std=0.0):
    """Flat observations (N, dim) per the planar layout.

    Orientation is encoded as (cos, sin); optional Gaussian noise is drawn
    per environment from its own generator so results do not depend on batch
    composition.
    """
    parts = [
        root[:, 1:2],
        np.cos(root[:, 2:3]),
        np.sin(root[:, 2:3]),
        root_vel[:, 0:2],
        root_vel[:, 2:3],
        q,
        qd,
        ee_root_relative(skeleton, root, q),
    ]
    obs = np.concatenate(parts, axis=1)
    if noise_std > 0.0 and rng_list is not None:
        for i, rng in enumerate(rng_list):
            obs[i] += rng.normal(0.0, noise_std, size=obs.shape[1])
    return obs


def build_observation(state, skeleton, noise_rng=None, noise_std=0.0):
    """Single-state observation plus its layout descriptor."""
    obs = build_observation_batch(
        state.root[None],
        state.root_vel[None],
        state.q[None],
        state.qd[None],
        skeleton,
        rng_list=[noise_rng] if noise_rng is not None else None,
        noise_std=noise_std if noise_rng is not None else 0.0,
    )[0]
    return obs, observation_layout(skeleton)
