"""Motion clips: fixed-rate sequences of root pose + joint angles, with I/O."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fk import fk_arrays
from .skeleton import Skeleton, wrap_angle

FORMAT_VERSION = 1


class MotionClip:
    """Immutable timestamped motion: roots (F, 3) and joint angles (F, J).

    End-effector tracks are derived (and cached) from FK when requested.
    """

    def __init__(self, skeleton, dt, roots, q, ee=None):
        roots = np.array(roots, dtype=np.float64)
        q = np.array(q, dtype=np.float64)
        if dt <= 0.0:
            raise ValueError("dt must be > 0")
        if roots.ndim != 2 or roots.shape[1] != 3:
            raise ValueError("roots must be (frames, 3)")
        if len(roots) < 2:
            raise ValueError("a clip needs at least 2 frames")
        if q.shape != (len(roots), skeleton.joint_count):
            raise ValueError(
                f"q shape {q.shape} != (frames={len(roots)}, joints={skeleton.joint_count})"
            )
        if not (np.all(np.isfinite(roots)) and np.all(np.isfinite(q))):
            raise ValueError("clip contains non-finite values")
        self.skeleton = skeleton
        self.dt = float(dt)
        self.roots = roots
        self.q = q
        self._ee = ee
        for arr in (self.roots, self.q):
            arr.setflags(write=False)

    @property
    def num_frames(self):
        return len(self.roots)

    @property
    def duration(self):
        return (self.num_frames - 1) * self.dt

    def times(self):
        return np.arange(self.num_frames) * self.dt

    def end_effector_tracks(self):
        """Per-frame world positions of each named end effector: dict name -> (F, 2)."""
        if self._ee is None:
            fk = fk_arrays(self.skeleton, self.roots, self.q)
            self._ee = {k: v.copy() for k, v in fk.end_effectors.items()}
        return self._ee

    def frame(self, i):
        return self.roots[i], self.q[i]


def _lerp_angles(a, b, w):
    """Shortest-arc interpolation between angle arrays (w in [0, 1])."""
    if w == 0.0:
        return a.copy()
    if w == 1.0:
        return b.copy()
    delta = wrap_angle(b - a)
    return a + w * delta


def resample(clip, new_dt):
    """Resample to a new frame interval.

    Positions interpolate linearly; angles along the shortest arc.  The first
    and last poses are preserved (the final sample is clamped to the clip
    end, so the last interval may be shorter when new_dt does not divide the
    duration).
    """
    if new_dt <= 0.0:
        raise ValueError("new_dt must be > 0")
    if new_dt == clip.dt:
        return MotionClip(clip.skeleton, clip.dt, clip.roots.copy(), clip.q.copy())
    T = clip.duration
    n = max(1, int(np.ceil(T / new_dt - 1e-9)))
    roots = np.empty((n + 1, 3))
    q = np.empty((n + 1, clip.q.shape[1]))
    for k in range(n + 1):
        t = min(k * new_dt, T)
        idx = t / clip.dt
        i0 = min(int(np.floor(idx + 1e-9)), clip.num_frames - 2)
        w = min(max(idx - i0, 0.0), 1.0)
        if w < 1e-12:
            w = 0.0
        elif w > 1.0 - 1e-12:
            w = 1.0
        r0, r1 = clip.roots[i0], clip.roots[i0 + 1]
        roots[k, :2] = (1.0 - w) * r0[:2] + w * r1[:2]
        roots[k, 2] = wrap_angle(_lerp_angles(r0[2:3], r1[2:3], w))[0]
        q[k] = _lerp_angles(clip.q[i0], clip.q[i0 + 1], w)
    return MotionClip(clip.skeleton, new_dt, roots, q)


def trim(clip, t0, t1):
    """Take the frames whose times fall inside [t0, t1]."""
    times = clip.times()
    mask = (times >= t0 - 1e-12) & (times <= t1 + 1e-12)
    if mask.sum() < 2:
        raise ValueError("trim window keeps fewer than 2 frames")
    return MotionClip(clip.skeleton, clip.dt, clip.roots[mask].copy(), clip.q[mask].copy())


def clip_features(clip):
    """Per-frame feature matrix: [root pose, q, root velocities, q velocities].

    Velocities are backward finite differences; frame 0 copies frame 1's so
    every frame has the same feature width 2 * (3 + J).
    """
    pos = np.concatenate([clip.roots, clip.q], axis=1)
    vel = np.empty_like(pos)
    diff = pos[1:] - pos[:-1]
    diff[:, 2] = wrap_angle(diff[:, 2])
    vel[1:] = diff / clip.dt
    vel[0] = vel[1]
    return np.concatenate([pos, vel], axis=1)


def feature_dim(skeleton):
    return 2 * (3 + skeleton.joint_count)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------


def clip_to_dict(clip):
    return {
        "format_version": FORMAT_VERSION,
        "skeleton": clip.skeleton.to_dict(),
        "dt": clip.dt,
        "frames": [
            {"root": [float(v) for v in r], "q": [float(v) for v in qq]}
            for r, qq in zip(clip.roots, clip.q)
        ],
    }


def clip_from_dict(d):
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported clip format_version {d.get('format_version')}")
    skeleton = Skeleton.from_dict(d["skeleton"])
    roots = np.array([f["root"] for f in d["frames"]], dtype=np.float64)
    q = np.array([f["q"] for f in d["frames"]], dtype=np.float64)
    return MotionClip(skeleton, d["dt"], roots, q)


def save_clip(clip, path):
    path = Path(path)
    payload = json.dumps(clip_to_dict(clip), sort_keys=True, allow_nan=False)
    path.write_text(payload)
    return path


def load_clip(path):
    with open(path) as fh:
        return clip_from_dict(json.load(fh))
