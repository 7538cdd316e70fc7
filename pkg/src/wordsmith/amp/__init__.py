from .features import (
    FeatureNormalizer,
    clip_feature_track,
    discriminator_features,
    discriminator_features_batch,
    feature_layout,
    reference_transitions,
)
from .discriminator import (
    amp_reward,
    amp_reward_bce,
    discriminator_loss,
    input_gradient_fd,
    style_reward,
)
from .gae import gae_advantages
from .nets import PolicyNets, RunningNorm, WarmStartRejected, gaussian_logp
from .ppo import ppo_update
from .rollout import collect_rollouts, reference_reset_fn
from .trainer import TrainConfig, TrainResult, history_to_csv, steps_to_reward, train

__all__ = [
    "FeatureNormalizer",
    "PolicyNets",
    "RunningNorm",
    "TrainConfig",
    "TrainResult",
    "WarmStartRejected",
    "amp_reward",
    "amp_reward_bce",
    "clip_feature_track",
    "collect_rollouts",
    "discriminator_features",
    "discriminator_features_batch",
    "discriminator_loss",
    "feature_layout",
    "gae_advantages",
    "gaussian_logp",
    "history_to_csv",
    "input_gradient_fd",
    "ppo_update",
    "reference_reset_fn",
    "reference_transitions",
    "steps_to_reward",
    "style_reward",
    "train",
]
