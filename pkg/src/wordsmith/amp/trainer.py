"""Adversarial motion prior training: alternating discriminator and PPO
updates over vectorized environments, with checkpointed warm starts."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..nn import NonFiniteGradError, adam_step, clip_global_norm
from ..sim import EnvPool, SimConfig, robot_d_spec
from .discriminator import discriminator_loss
from .features import FeatureNormalizer, clip_feature_track, feature_layout, reference_transitions
from .gae import gae_advantages
from .nets import PolicyNets, WarmStartRejected
from .ppo import ppo_update
from .rollout import collect_rollouts, reference_reset_fn

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    env_count: int = 64
    horizon: int = 128
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    epochs: int = 4
    minibatch_size: int = 2048
    lr_policy: float = 3e-4
    lr_value: float = 3e-4
    lr_disc: float = 1e-4
    w_gp: float = 5.0
    gp_eps: float = 1e-3
    total_steps: int = 2_000_000
    seed: int = 0
    entropy_coef: float = 0.0
    max_grad_norm: float = 1.0
    action_scale: float = 0.5
    hidden: tuple = (64, 64)
    init_log_std: float = -1.5
    disc_minibatch: int = 512
    disc_updates: int = 4
    disc_burnin_iters: int = 2   # D-only iterations before the measured curve
    gp_subsample: int = 64
    max_episode_steps: int | None = None  # None = horizon
    bce_discriminator: bool = False
    early_stop_reward: float | None = None  # stop when mean reward reaches this

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0 and 0.0 <= self.gae_lambda <= 1.0):
            raise ValueError("gamma and gae_lambda must lie in [0, 1]")
        if self.clip_eps <= 0:
            raise ValueError("clip_eps must be > 0")
        if self.env_count < 1:
            raise ValueError("need at least one environment")


@dataclass
class TrainResult:
    checkpoint: object          # final policy checkpoint
    best_checkpoint: object
    history: list               # rows: step, mean_reward, mean_ep_len, disc_loss
    warm_start_used: bool
    warm_start_rejected: str | None = None


def _disc_update(nets, ref_pairs, pol_pairs, config, rng):
    """A few minibatch passes of the discriminator objective.

    Main terms use the full minibatch; the gradient penalty runs on a
    subsample of the reference rows to bound the finite-difference probes.
    """
    from .discriminator import input_gradient_fd

    last = {}
    for _ in range(config.disc_updates):
        ref_idx = rng.integers(0, len(ref_pairs), size=min(config.disc_minibatch, len(ref_pairs)))
        pol_idx = rng.integers(0, len(pol_pairs), size=min(config.disc_minibatch, len(pol_pairs)))
        ref_mb = ref_pairs[ref_idx]
        pol_mb = pol_pairs[pol_idx]
        params = nets.disc.params()
        for p in params:
            p.grad = None
        loss, comps = discriminator_loss(
            nets.disc, ref_mb, pol_mb, w_gp=0.0, bce=config.bce_discriminator
        )
        if config.w_gp > 0.0:
            gp_rows = ref_mb[: config.gp_subsample] if config.gp_subsample else ref_mb
            grad = input_gradient_fd(nets.disc, gp_rows, h=config.gp_eps)
            gp = (grad**2).sum(axis=1).mean()
            comps["grad_penalty"] = float(gp.data)
            loss = loss + config.w_gp * gp
        loss.backward()
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in params]
        grads, _ = clip_global_norm(grads, config.max_grad_norm)
        try:
            adam_step(params, grads, nets.opt_disc, lr=config.lr_disc)
        except NonFiniteGradError:
            log.warning("discriminator update skipped: non-finite gradients")
            continue
        comps["total"] = float(loss.data)
        last = comps
    return last


def train(reference_clip, config, warm_start=None, robot=None, sim_config=None):
    """Train a control policy to imitate the retargeted reference clip.

    warm_start is an optional Checkpoint whose weights and normalizer seed
    the run; an incompatible checkpoint falls back to scratch and the cause
    is recorded on the result.  Returns a TrainResult with reward history
    rows logged once per iteration.
    """
    robot = robot if robot is not None else robot_d_spec()
    sim_config = sim_config if sim_config is not None else SimConfig()
    if reference_clip.skeleton.joint_count != robot.skeleton.joint_count:
        raise ValueError("reference clip does not match the robot skeleton")

    rng = np.random.default_rng(config.seed)
    pool = EnvPool(
        robot,
        sim_config,
        config.env_count,
        seed=config.seed,
        reset_fn=reference_reset_fn(reference_clip),
    )
    ref_pairs_raw = reference_transitions(reference_clip)
    normalizer = FeatureNormalizer.from_reference(clip_feature_track(reference_clip))
    ref_pairs = normalizer.normalize_pairs(ref_pairs_raw)
    feat_dim = feature_layout(robot.skeleton).dim

    nets = PolicyNets(
        obs_dim=pool.layout.dim,
        act_dim=robot.skeleton.joint_count,
        disc_dim=2 * feat_dim,
        hidden=config.hidden,
        seed=config.seed,
        init_log_std=config.init_log_std,
    )
    warm_used = False
    warm_rejected = None
    if warm_start is not None:
        try:
            if warm_start.skeleton_hash and warm_start.skeleton_hash != robot.skeleton.structure_hash():
                raise WarmStartRejected("skeleton hash mismatch")
            nets.load_checkpoint(warm_start)
            warm_used = True
        except WarmStartRejected as err:
            warm_rejected = str(err)
            log.warning("warm start rejected (%s); training from scratch", err)

    meta = dict(
        skeleton_hash=robot.skeleton.structure_hash(),
        config={"env_count": config.env_count, "horizon": config.horizon},
    )
    history = []
    best_reward = -np.inf
    best_ck = None
    total = 0
    iteration = 0
    while total < config.total_steps:
        burnin = iteration < config.disc_burnin_iters
        nets.obs_norm.frozen = False
        buffers, stats = collect_rollouts(nets, pool, normalizer, config.horizon, config, rng)
        nets.obs_norm.frozen = True
        total += stats["env_steps"]
        iteration += 1

        pol_pairs = normalizer.normalize_pairs(buffers["feat_pairs"])
        disc_stats = _disc_update(nets, ref_pairs, pol_pairs, config, rng)
        if burnin:
            # warm up the discriminator so the reward curve starts honest;
            # these env steps count toward the budget but train only D
            history.append(
                {
                    "step": total,
                    "mean_reward": stats["mean_reward"],
                    "mean_ep_len": stats["mean_ep_len"],
                    "disc_loss": disc_stats.get("total", float("nan")),
                    "falls": stats["falls"],
                    "kl": 0.0,
                    "clip_fraction": 0.0,
                    "value_loss": 0.0,
                    "burnin": True,
                }
            )
            continue

        adv, rets = gae_advantages(
            buffers["rewards"], buffers["values"], buffers["dones"],
            config.gamma, config.gae_lambda, buffers["bootstrap_value"],
        )
        T, N = buffers["rewards"].shape
        flat = {
            "obs": buffers["obs"].reshape(T * N, -1),
            "actions": buffers["actions"].reshape(T * N, -1),
            "logp": buffers["logp"].reshape(T * N),
            "advantages": adv.reshape(T * N),
            "returns": rets.reshape(T * N),
        }
        ppo_stats = ppo_update(nets, flat, config, rng)

        row = {
            "step": total,
            "mean_reward": stats["mean_reward"],
            "mean_ep_len": stats["mean_ep_len"],
            "disc_loss": disc_stats.get("total", float("nan")),
            "falls": stats["falls"],
            "kl": ppo_stats["kl"],
            "clip_fraction": ppo_stats["clip_fraction"],
            "value_loss": ppo_stats["value_loss"],
            "burnin": False,
        }
        history.append(row)
        if stats["mean_reward"] > best_reward:
            best_reward = stats["mean_reward"]
            best_ck = nets.to_checkpoint(
                tag="policy", total_steps=total, best_reward=best_reward, **meta
            )
        if config.early_stop_reward is not None and stats["mean_reward"] >= config.early_stop_reward:
            break

    final_ck = nets.to_checkpoint(
        tag="policy", total_steps=total, best_reward=max(best_reward, -1e9), **meta
    )
    if best_ck is None:
        best_ck = final_ck
    return TrainResult(
        checkpoint=final_ck,
        best_checkpoint=best_ck,
        history=history,
        warm_start_used=warm_used,
        warm_start_rejected=warm_rejected,
    )


def steps_to_reward(history, threshold):
    """Env steps until the post-burnin reward curve first reaches threshold.

    Returns None when the run never got there.
    """
    for row in history:
        if row.get("burnin"):
            continue
        if row["mean_reward"] >= threshold:
            return row["step"]
    return None


def history_to_csv(history, path):
    """Reward curve CSV: step, mean_reward, mean_ep_len, disc_loss."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "mean_reward", "mean_ep_len", "disc_loss"])
        for row in history:
            writer.writerow(
                [row["step"], row["mean_reward"], row["mean_ep_len"], row["disc_loss"]]
            )
    return path
