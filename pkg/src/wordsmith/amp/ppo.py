"""Clipped-surrogate PPO update over collected rollouts."""

from __future__ import annotations

import logging

import numpy as np

from ..nn import NonFiniteGradError, Tensor, adam_step, clip_global_norm

log = logging.getLogger(__name__)


def ppo_update(nets, rollout, config, rng):
    """One PPO phase: minibatched epochs of clipped policy and value losses.

    rollout holds flattened arrays: obs (B, O), actions (B, A), logp (B,),
    advantages (B,), returns (B,).  Advantages are normalized here.  The
    observation normalizer must already be frozen by the caller.
    Returns stats including clip fraction, entropy, and a KL estimate.
    """
    obs = rollout["obs"]
    actions = rollout["actions"]
    logp_old = rollout["logp"]
    adv = rollout["advantages"].copy()
    returns = rollout["returns"]
    B = len(obs)
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)

    z = nets.obs_norm.normalize(obs)
    stats = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0,
             "clip_fraction": 0.0, "kl": 0.0, "skipped_minibatches": 0}
    n_updates = 0
    mb = min(config.minibatch_size, B)

    for _ in range(config.epochs):
        order = rng.permutation(B)
        for start in range(0, B, mb):
            sel = order[start : start + mb]
            try:
                s = _minibatch_update(nets, z[sel], actions[sel], logp_old[sel],
                                      adv[sel], returns[sel], config)
            except NonFiniteGradError:
                stats["skipped_minibatches"] += 1
                log.warning("ppo minibatch skipped: non-finite gradients")
                continue
            for k in ("policy_loss", "value_loss", "entropy", "clip_fraction", "kl"):
                stats[k] += s[k]
            n_updates += 1
    if n_updates:
        for k in ("policy_loss", "value_loss", "entropy", "clip_fraction", "kl"):
            stats[k] /= n_updates
    return stats


def _minibatch_update(nets, z, actions, logp_old, adv, returns, config):
    mean = nets.policy.forward(z)
    log_std = nets.log_std
    std_inv = (-log_std).exp()
    delta = (Tensor(actions) - mean) * std_inv
    logp_new = ((delta**2) * -0.5 - log_std - 0.5 * np.log(2.0 * np.pi)).sum(axis=1)
    ratio = (logp_new - Tensor(logp_old)).exp()

    adv_t = Tensor(adv)
    un_clipped = ratio * adv_t
    clipped = _clip_tensor(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps) * adv_t
    surrogate = _elementwise_min(un_clipped, clipped).mean()
    entropy = (log_std + 0.5 * np.log(2.0 * np.pi * np.e)).sum()
    policy_loss = -surrogate - config.entropy_coef * entropy

    params_p = nets.policy.params() + [nets.log_std]
    for p in params_p:
        p.grad = None
    policy_loss.backward()
    grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in params_p]
    grads, _ = clip_global_norm(grads, config.max_grad_norm)
    adam_step(params_p, grads, nets.opt_policy, lr=config.lr_policy)
    nets.log_std.data = np.clip(nets.log_std.data, -4.0, 1.0)

    value_pred = nets.value.forward(z)
    value_loss = ((value_pred[:, 0] - Tensor(returns)) ** 2).mean()
    params_v = nets.value.params()
    for p in params_v:
        p.grad = None
    value_loss.backward()
    grads_v = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in params_v]
    grads_v, _ = clip_global_norm(grads_v, config.max_grad_norm)
    adam_step(params_v, grads_v, nets.opt_value, lr=config.lr_value)

    with np.errstate(over="ignore"):
        ratio_v = ratio.data
    return {
        "policy_loss": float(policy_loss.data),
        "value_loss": float(value_loss.data),
        "entropy": float(entropy.data),
        "clip_fraction": float(np.mean(np.abs(ratio_v - 1.0) > config.clip_eps)),
        "kl": float(np.mean(logp_old - logp_new.data)),
    }


def _clip_tensor(x, lo, hi):
    """Clip with zero gradient outside the interval."""
    inside = (x.data >= lo) & (x.data <= hi)
    out_data = np.clip(x.data, lo, hi)

    def bwd(g):
        x._accumulate(g * inside)

    return Tensor(out_data, _parents=(x,), _backward=bwd)


def _elementwise_min(a, b):
    take_a = a.data <= b.data
    out_data = np.where(take_a, a.data, b.data)

    def bwd(g):
        a._accumulate(g * take_a)
        b._accumulate(g * (~take_a))

    return Tensor(out_data, _parents=(a, b), _backward=bwd)
