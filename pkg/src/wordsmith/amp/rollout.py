"""Rollout collection: vectorized env stepping with the AMP style reward."""

from __future__ import annotations

import numpy as np

from ..sim.env import clip_state
from .discriminator import style_reward
from .features import discriminator_features_batch


def reference_reset_fn(clip, rng_salt=0):
    """Reference-state initialization: episodes start from a random frame."""

    def reset(i, rng):
        frame = int(rng.integers(0, clip.num_frames))
        return clip_state(clip, frame)

    return reset


def collect_rollouts(nets, pool, normalizer, horizon, config, rng):
    """Collect horizon steps from every env in the pool.

    Per step: sample actions from the policy, map them to PD targets around
    the rest pose, step the batch, and score the transition features with
    the discriminator (the only reward).  Episodes reset on falls,
    divergence, or the per-episode step cap.  Returns (buffers, stats).
    """
    sk = pool.spec.skeleton
    n = pool.n
    obs_buf = np.empty((horizon, n, pool.layout.dim))
    act_buf = np.empty((horizon, n, sk.joint_count))
    logp_buf = np.empty((horizon, n))
    val_buf = np.empty((horizon, n))
    rew_buf = np.empty((horizon, n))
    done_buf = np.zeros((horizon, n), dtype=bool)
    feat_pairs = np.empty((horizon, n, 2 * normalizer.mean.shape[0]))

    ep_lengths = []
    falls = 0
    diverged_count = 0
    max_ep = config.max_episode_steps or horizon

    for t in range(horizon):
        obs = pool.observations(noisy=True)
        nets.obs_norm.update(obs)
        actions, logp, values = nets.act(obs, rng)
        target = pool.spec.rest_q[None] + config.action_scale * actions

        s = pool.state
        feat_prev = discriminator_features_batch(s.root, s.root_vel, s.q, s.qd, sk)
        fell, diverged = pool.step(target)
        s = pool.state
        feat_next = discriminator_features_batch(s.root, s.root_vel, s.q, s.qd, sk)

        rewards = style_reward(nets.disc, feat_prev, feat_next, normalizer,
                               bce=config.bce_discriminator)
        timeout = pool.episode_steps >= max_ep
        done = fell | diverged | timeout

        obs_buf[t] = obs
        act_buf[t] = actions
        logp_buf[t] = logp
        val_buf[t] = values
        rew_buf[t] = rewards
        done_buf[t] = done
        feat_pairs[t] = np.concatenate([feat_prev, feat_next], axis=1)

        falls += int(fell.sum())
        diverged_count += int(diverged.sum())
        for i in np.where(done)[0]:
            ep_lengths.append(int(pool.episode_steps[i]))
            pool.reset_env(i)

    bootstrap = nets.values_of(pool.observations(noisy=True))
    # episodes still running count at their current length for the stat
    running = [int(k) for k in pool.episode_steps if k > 0]
    mean_ep_len = float(np.mean(ep_lengths + running)) if (ep_lengths or running) else 0.0

    buffers = {
        "obs": obs_buf,
        "actions": act_buf,
        "logp": logp_buf,
        "values": val_buf,
        "rewards": rew_buf,
        "dones": done_buf,
        "feat_pairs": feat_pairs.reshape(horizon * n, -1),
        "bootstrap_value": bootstrap,
    }
    stats = {
        "mean_reward": float(rew_buf.mean()),
        "mean_ep_len": mean_ep_len,
        "falls": falls,
        "diverged": diverged_count,
        "env_steps": horizon * n,
    }
    return buffers, stats
