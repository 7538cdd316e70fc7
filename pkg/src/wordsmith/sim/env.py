"""Vectorized environment pool with domain randomization and fall resets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import SimConfig, SimModel, SimState, VecState, step_batch
from .observation import build_observation_batch, observation_layout


@dataclass
class EpisodeParams:
    """Per-episode randomization draw."""

    gravity: float
    obs_noise_std: float
    action_noise_std: float


def randomize_episode(config, rng):
    """Gravity is drawn once per episode; obs/action noise stds are recorded
    for per-step use."""
    g = config.gravity
    if config.gravity_noise_std > 0.0:
        g = rng.normal(config.gravity, config.gravity_noise_std)
    return EpisodeParams(
        gravity=float(g),
        obs_noise_std=config.obs_noise_std,
        action_noise_std=config.action_noise_std,
    )


def clip_state(clip, frame):
    """SimState for one clip frame; velocities by finite differences."""
    frame = int(np.clip(frame, 0, clip.num_frames - 1))
    prev = max(frame - 1, 0)
    nxt = min(frame + 1, clip.num_frames - 1)
    span = (nxt - prev) * clip.dt
    droot = (clip.roots[nxt] - clip.roots[prev]) / span
    dq = (clip.q[nxt] - clip.q[prev]) / span
    return SimState(
        root=clip.roots[frame].copy(),
        root_vel=droot.copy(),
        q=clip.q[frame].copy(),
        qd=dq.copy(),
        contacts=np.zeros(2, dtype=bool),
        time=0.0,
    )


class EnvPool:
    """N independent environments stepped as one batch.

    Each env owns an RNG stream split from the master seed, so trajectories
    are reproducible regardless of how many envs run alongside.  A reset_fn
    (env_index, rng) -> SimState provides initial states (reference-state
    initialization when training); the default is the robot's rest pose.
    """

    def __init__(self, spec, config, n_envs, seed=0, reset_fn=None):
        self.spec = spec
        self.config = config
        self.n = n_envs
        self.model = SimModel(spec, config)
        self.layout = observation_layout(spec.skeleton)
        seqs = np.random.SeedSequence(seed).spawn(n_envs)
        self.rngs = [np.random.default_rng(s) for s in seqs]
        self.reset_fn = reset_fn if reset_fn is not None else self._rest_state
        J = spec.skeleton.joint_count
        self.state = VecState(
            root=np.zeros((n_envs, 3)),
            root_vel=np.zeros((n_envs, 3)),
            q=np.zeros((n_envs, J)),
            qd=np.zeros((n_envs, J)),
            contacts=np.zeros((n_envs, 2), dtype=bool),
            time=np.zeros(n_envs),
        )
        self.gravity = np.full(n_envs, config.gravity)
        self.episode_steps = np.zeros(n_envs, dtype=np.int64)
        self.reset_all()

    def _rest_state(self, i, rng):
        J = self.spec.skeleton.joint_count
        return SimState(
            root=self.spec.rest_root.as_array(),
            root_vel=np.zeros(3),
            q=self.spec.rest_q.copy(),
            qd=np.zeros(J),
            contacts=np.zeros(2, dtype=bool),
        )

    def reset_env(self, i):
        s = self.reset_fn(i, self.rngs[i])
        self.state.root[i] = s.root
        self.state.root_vel[i] = s.root_vel
        self.state.q[i] = np.clip(s.q, *self.spec.skeleton.joint_limits)
        self.state.qd[i] = s.qd
        self.state.contacts[i] = False
        self.state.time[i] = 0.0
        self.episode_steps[i] = 0
        self.gravity[i] = randomize_episode(self.config, self.rngs[i]).gravity

    def reset_all(self):
        for i in range(self.n):
            self.reset_env(i)

    def observations(self, noisy=True):
        std = self.config.obs_noise_std if noisy else 0.0
        return build_observation_batch(
            self.state.root,
            self.state.root_vel,
            self.state.q,
            self.state.qd,
            self.spec.skeleton,
            rng_list=self.rngs if std > 0 else None,
            noise_std=std,
        )

    def step(self, target_q):
        """Step all envs; returns (fell, diverged) bool arrays.

        Envs are NOT auto-reset; the caller reads features/rewards first and
        then calls reset_env on the done ones.
        """
        target_q = np.asarray(target_q, dtype=np.float64)
        if self.config.action_noise_std > 0.0:
            noise = np.stack(
                [
                    rng.normal(0.0, self.config.action_noise_std, size=target_q.shape[1])
                    for rng in self.rngs
                ]
            )
            target_q = target_q + noise
        lo, hi = self.spec.skeleton.joint_limits
        target_q = np.clip(target_q, lo, hi)

        diverged = np.zeros(self.n, dtype=bool)
        try:
            self.state = step_batch(self.model, self.state, target_q, self.config, self.gravity)
        except Exception:
            # isolate the divergent envs by stepping them one at a time
            good = self.state.copy()
            for i in range(self.n):
                sub = VecState(
                    good.root[i : i + 1].copy(),
                    good.root_vel[i : i + 1].copy(),
                    good.q[i : i + 1].copy(),
                    good.qd[i : i + 1].copy(),
                    good.contacts[i : i + 1].copy(),
                    good.time[i : i + 1].copy(),
                )
                try:
                    out = step_batch(
                        self.model, sub, target_q[i : i + 1], self.config, self.gravity[i : i + 1]
                    )
                    good.root[i] = out.root[0]
                    good.root_vel[i] = out.root_vel[0]
                    good.q[i] = out.q[0]
                    good.qd[i] = out.qd[0]
                    good.contacts[i] = out.contacts[0]
                    good.time[i] = out.time[0]
                except Exception:
                    diverged[i] = True
            self.state = good
        self.episode_steps += 1
        fell = self.state.root[:, 1] < self.spec.terminate_height
        return fell, diverged
