"""Policy/value/discriminator networks and their optimizer state."""

from __future__ import annotations

import numpy as np

from ..checkpoint import Checkpoint
from ..nn import AdamState, Mlp, Tensor


class RunningNorm:
    """Running mean/variance (Welford over batches) for observations."""

    def __init__(self, dim, clip=10.0):
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.count = 1e-4
        self.clip = clip
        self.frozen = False

    def update(self, batch):
        if self.frozen:
            return
        batch = np.asarray(batch, dtype=np.float64)
        b_mean = batch.mean(axis=0)
        b_var = batch.var(axis=0)
        b_count = len(batch)
        delta = b_mean - self.mean
        tot = self.count + b_count
        self.mean = self.mean + delta * (b_count / tot)
        m_a = self.var * self.count
        m_b = b_var * b_count
        self.var = (m_a + m_b + delta**2 * self.count * b_count / tot) / tot
        self.count = tot

    def normalize(self, x):
        z = (x - self.mean) / np.sqrt(self.var + 1e-8)
        return np.clip(z, -self.clip, self.clip)


class WarmStartRejected(RuntimeError):
    """Checkpoint is incompatible with the requested layout."""


class PolicyNets:
    """Actor (mean + state-independent log-std), critic, and discriminator."""

    def __init__(self, obs_dim, act_dim, disc_dim, hidden=(64, 64), seed=0,
                 init_log_std=-1.0):
        rng = np.random.default_rng(seed)
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.disc_dim = disc_dim
        self.policy = Mlp([obs_dim, *hidden, act_dim], rng=rng)
        # small final layer keeps the initial policy near the rest pose
        self.policy.weights[-1].data *= 0.01
        self.value = Mlp([obs_dim, *hidden, 1], rng=rng)
        self.disc = Mlp([disc_dim, *hidden, 1], rng=rng)
        self.log_std = Tensor(np.full(act_dim, init_log_std), requires_grad=True)
        self.obs_norm = RunningNorm(obs_dim)
        self.opt_policy = AdamState(self.policy.params() + [self.log_std])
        self.opt_value = AdamState(self.value.params())
        self.opt_disc = AdamState(self.disc.params())

    # -- acting ----------------------------------------------------------------

    def act(self, obs, rng):
        """Sample actions; returns (actions, log-probs, values)."""
        z = self.obs_norm.normalize(obs)
        mean = self.policy.forward(z).data
        std = np.exp(self.log_std.data)
        noise = rng.standard_normal(mean.shape)
        actions = mean + std * noise
        logp = gaussian_logp(actions, mean, self.log_std.data)
        values = self.value.forward(z).data[:, 0]
        return actions, logp, values

    def values_of(self, obs):
        return self.value.forward(self.obs_norm.normalize(obs)).data[:, 0]

    # -- checkpointing -----------------------------------------------------------

    def to_checkpoint(self, tag="policy", **meta):
        ck = Checkpoint(tag=tag, **meta)
        ck.put_network("policy", self.policy)
        ck.put_network("value", self.value)
        ck.put_network("discriminator", self.disc)
        ck.put_array("log_std", self.log_std.data)
        ck.put_array("obs_norm_mean", self.obs_norm.mean)
        ck.put_array("obs_norm_var", self.obs_norm.var)
        ck.put_array("obs_norm_count", np.array([self.obs_norm.count]))
        return ck

    def load_checkpoint(self, ck):
        """Adopt weights and normalizer stats; dims must match exactly."""
        policy = ck.get_network("policy")
        value = ck.get_network("value")
        disc = ck.get_network("discriminator")
        if policy.in_dim != self.obs_dim or policy.out_dim != self.act_dim:
            raise WarmStartRejected(
                f"policy dims {policy.sizes} incompatible with obs {self.obs_dim}, act {self.act_dim}"
            )
        if disc.in_dim != self.disc_dim:
            raise WarmStartRejected(
                f"discriminator input {disc.in_dim} != expected {self.disc_dim}"
            )
        self.policy = policy
        self.value = value
        self.disc = disc
        self.log_std = Tensor(ck.get_array("log_std"), requires_grad=True)
        self.obs_norm.mean = ck.get_array("obs_norm_mean")
        self.obs_norm.var = ck.get_array("obs_norm_var")
        self.obs_norm.count = float(ck.get_array("obs_norm_count")[0])
        self.opt_policy = AdamState(self.policy.params() + [self.log_std])
        self.opt_value = AdamState(self.value.params())
        self.opt_disc = AdamState(self.disc.params())


def gaussian_logp(actions, mean, log_std):
    """Diagonal Gaussian log density, summed over action dims."""
    std = np.exp(log_std)
    z = (actions - mean) / std
    per_dim = -0.5 * z**2 - log_std - 0.5 * np.log(2.0 * np.pi)
    return per_dim.sum(axis=-1)
