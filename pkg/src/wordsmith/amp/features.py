"""Discriminator feature extraction: translation-invariant state summaries."""

from __future__ import annotations

import numpy as np

from ..sim.observation import ObservationLayout, ee_root_relative


def feature_layout(skeleton):
    """Per-state feature slices; excludes root world x so two states that
    differ only by forward translation are indistinguishable."""
    J = skeleton.joint_count
    E = len(skeleton.end_effectors)
    return ObservationLayout(
        parts=(
            ("root_height", 1),
            ("root_orientation_cos_sin", 2),
            ("root_angular_velocity", 1),
            ("joint_positions", J),
            ("joint_velocities", J),
            ("end_effector_positions", 2 * E),
        )
    )


def discriminator_features_batch(root, root_vel, q, qd, skeleton):
    """(N, F) feature rows for batched states."""
    parts = [
        root[:, 1:2],
        np.cos(root[:, 2:3]),
        np.sin(root[:, 2:3]),
        root_vel[:, 2:3],
        q,
        qd,
        ee_root_relative(skeleton, root, q),
    ]
    return np.concatenate(parts, axis=1)


def discriminator_features(state, skeleton):
    """Features of a single SimState."""
    return discriminator_features_batch(
        state.root[None], state.root_vel[None], state.q[None], state.qd[None], skeleton
    )[0]


def clip_feature_track(clip):
    """Per-frame discriminator features of a motion clip.

    Velocities come from finite differences (frame 0 copies frame 1, like
    the motion feature convention).
    """
    from ..motion.skeleton import wrap_angle

    roots = clip.roots
    q = clip.q
    droot = np.empty_like(roots)
    diff = roots[1:] - roots[:-1]
    diff[:, 2] = wrap_angle(diff[:, 2])
    droot[1:] = diff / clip.dt
    droot[0] = droot[1]
    dq = np.empty_like(q)
    dq[1:] = (q[1:] - q[:-1]) / clip.dt
    dq[0] = dq[1]
    return discriminator_features_batch(roots, droot, q, dq, clip.skeleton)


def reference_transitions(clip):
    """(T-1, 2F) dataset of consecutive-frame feature pairs."""
    feats = clip_feature_track(clip)
    return np.concatenate([feats[:-1], feats[1:]], axis=1)


class FeatureNormalizer:
    """Fixed per-feature standardization derived from the reference set."""

    def __init__(self, mean, std):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.std = np.maximum(np.asarray(std, dtype=np.float64), 1e-4)

    @classmethod
    def from_reference(cls, single_frame_features):
        f = np.asarray(single_frame_features)
        return cls(f.mean(axis=0), f.std(axis=0))

    def normalize(self, feats):
        return (feats - self.mean) / self.std

    def normalize_pairs(self, pairs):
        F = self.mean.shape[0]
        out = np.empty_like(pairs)
        out[:, :F] = self.normalize(pairs[:, :F])
        out[:, F:] = self.normalize(pairs[:, F:])
        return out
