"""Generalized advantage estimation over (T, N) rollout arrays."""

from __future__ import annotations

import numpy as np


def gae_advantages(rewards, values, dones, gamma, gae_lambda, bootstrap_value):
    """Standard GAE recursion.

    rewards/values/dones are (T, N); dones marks transitions that ended an
    episode (no bootstrapping across them).  bootstrap_value (N,) is V(s_T)
    for the step after the rollout.  Returns (advantages, returns) with
    returns = advantages + values; normalization happens at the PPO stage.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    if not (rewards.shape == values.shape == dones.shape):
        raise ValueError("rewards/values/dones shapes must match")
    T, N = rewards.shape
    bootstrap_value = np.asarray(bootstrap_value, dtype=np.float64).reshape(N)

    adv = np.zeros((T, N))
    last = np.zeros(N)
    next_value = bootstrap_value
    for t in range(T - 1, -1, -1):
        not_done = ~dones[t]
        delta = rewards[t] + gamma * next_value * not_done - values[t]
        last = delta + gamma * gae_lambda * not_done * last
        adv[t] = last
        next_value = values[t]
    return adv, adv + values
