"""VQ-VAE training on a synthetic motion corpus."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..motion import clip_features
from ..nn import adam_step, AdamState, clip_global_norm
from .model import VqVaeConfig, VqVaeModel, encode_decode, quantize_batch, vqvae_loss


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the partial history for diagnosis."""

    def __init__(self, step, history):
        super().__init__(f"vq-vae training diverged at step {step}")
        self.step = step
        self.history = history


@dataclass
class VqVaeTrainConfig:
    steps: int = 20000
    batch_size: int = 64
    lr: float = 1e-3
    seed: int = 0
    holdout_fraction: float = 0.2
    window_stride: int = 4
    grad_clip: float = 1.0
    model: VqVaeConfig = field(default_factory=VqVaeConfig)


def windows_from_clip(clip, window, stride):
    """Overlapping feature windows; root x is rebased to the window start so
    traveling gaits quantize by shape, not by absolute position."""
    feats = clip_features(clip)
    out = []
    for start in range(0, len(feats) - window + 1, stride):
        w = feats[start : start + window].copy()
        w[:, 0] -= w[0, 0]
        out.append(w)
    return out


def corpus_windows(items, window, stride):
    """Windows per corpus item, keyed by item so splits happen clip-wise."""
    return [windows_from_clip(item.clip, window, stride) for item in items]


def constant_predictor_baseline(windows, delta=1.0):
    """Smooth-L1 of predicting the per-feature mean everywhere (separate pass)."""
    stack = np.concatenate([w.reshape(-1, w.shape[-1]) for w in windows], axis=0)
    mean = stack.mean(axis=0)
    err = stack - mean
    small = np.abs(err) <= delta
    vals = np.where(small, 0.5 * err**2 / delta, np.abs(err) - 0.5 * delta)
    return float(vals.mean()), mean


def heldout_reconstruction_error(model, windows):
    """Raw-space smooth-L1 of the quantize/reconstruct path."""
    delta = model.config.smooth_l1_delta
    stack = windows if isinstance(windows, np.ndarray) else np.stack(windows)
    if stack.ndim == 2:
        stack = stack[None]
    _, recon = encode_decode(model, stack)
    err = recon - stack
    small = np.abs(err) <= delta
    vals = np.where(small, 0.5 * err**2 / delta, np.abs(err) - 0.5 * delta)
    return float(vals.mean())


def codebook_usage(model, windows):
    """Fraction of codes selected at least once over the given windows."""
    stack = windows if isinstance(windows, np.ndarray) else np.stack(windows)
    if stack.ndim == 2:
        stack = stack[None]
    idx = model.encode_indices(stack)
    return len(np.unique(idx)) / model.codebook.k


def train_vqvae(items, config):
    """Train on a labeled corpus; returns (model, history).

    History rows log train loss components and the held-out raw-space
    reconstruction error roughly once per epoch.  Deterministic given
    config.seed (single-threaded).
    """
    if not items:
        raise ValueError("corpus is empty")
    rng = np.random.default_rng(config.seed)
    mcfg = config.model
    per_clip = corpus_windows(items, mcfg.window, config.window_stride)
    per_clip = [ws for ws in per_clip if ws]
    if not per_clip:
        raise ValueError("no window fits: clips shorter than the model window")

    n_hold = int(round(config.holdout_fraction * len(per_clip)))
    n_hold = min(max(n_hold, 1 if len(per_clip) > 1 else 0), len(per_clip) - 1)
    order = rng.permutation(len(per_clip))
    hold_ids = set(order[:n_hold].tolist())
    train_w = [w for i, ws in enumerate(per_clip) if i not in hold_ids for w in ws]
    hold_w = [w for i, ws in enumerate(per_clip) if i in hold_ids for w in ws]
    if not hold_w:
        hold_w = train_w

    feature_dim = train_w[0].shape[-1]
    model = VqVaeModel(feature_dim, mcfg, rng=rng)
    stack = np.concatenate([w.reshape(-1, feature_dim) for w in train_w], axis=0)
    model.set_normalization(stack.mean(axis=0), stack.std(axis=0))

    train_arr = np.stack(train_w)  # (N, window, F)

    # seed the codebook from encoder outputs so most codes start reachable
    probe = train_arr[rng.integers(0, len(train_arr), size=max(4 * model.codebook.k, 64))]
    flat, _ = model._flatten(probe)
    z0 = model.encoder.forward(flat).data.reshape(-1, mcfg.code_dim)
    pick = rng.permutation(len(z0))[: model.codebook.k]
    model.codebook.codes.data = z0[pick] + rng.normal(0.0, 1e-3, size=(model.codebook.k, mcfg.code_dim))

    params = model.params()
    state = AdamState(params)
    history = []
    hold_arr = np.stack(hold_w)
    epoch_steps = max(1, len(train_arr) // config.batch_size)
    log_every = max(epoch_steps, config.steps // 200, 1)

    for step in range(config.steps):
        batch = train_arr[rng.integers(0, len(train_arr), size=config.batch_size)]
        for p in params:
            p.grad = None
        try:
            losses = vqvae_loss(model, batch)
            total = losses["l_total"]
            total.backward()
        except FloatingPointError:
            raise TrainingDiverged(step, history)
        if not np.isfinite(total.data):
            raise TrainingDiverged(step, history)
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in params]
        grads, _ = clip_global_norm(grads, config.grad_clip)
        adam_step(params, grads, state, lr=config.lr)
        if step % log_every == 0 or step == config.steps - 1:
            history.append(
                {
                    "step": step,
                    "l_re": float(losses["l_re"].data),
                    "l_embed": float(losses["l_embed"].data),
                    "l_commit": float(losses["l_commit"].data),
                    "l_total": float(total.data),
                    "heldout_l_re": heldout_reconstruction_error(model, hold_arr),
                }
            )
    return model, history
