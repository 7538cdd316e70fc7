"""Adversarial motion prior: transition discriminator and its reward."""

from __future__ import annotations

import numpy as np

from ..nn import Mlp, Tensor


def amp_reward(d_value):
    """Style reward r = max[0, 1 - 0.25 (D - 1)^2], elementwise."""
    d = np.asarray(d_value, dtype=np.float64)
    r = np.maximum(0.0, 1.0 - 0.25 * (d - 1.0) ** 2)
    return float(r) if np.isscalar(d_value) or d.ndim == 0 else r


def amp_reward_bce(d_value):
    """Sigmoid-mapped reward for the cross-entropy discriminator variant."""
    d = np.asarray(d_value, dtype=np.float64)
    r = 1.0 / (1.0 + np.exp(-d))
    return float(r) if np.isscalar(d_value) or d.ndim == 0 else r


def input_gradient_fd(disc, x, h=1e-3):
    """Differentiable central-finite-difference input gradient of D.

    Builds one big batch of x +/- h e_k probes so backprop through the
    result only needs first-order machinery.  Returns a Tensor (B, F).
    """
    x = np.asarray(x, dtype=np.float64)
    B, F = x.shape
    plus = np.repeat(x[:, None, :], F, axis=1)
    minus = plus.copy()
    idx = np.arange(F)
    plus[:, idx, idx] += h
    minus[:, idx, idx] -= h
    stacked = np.concatenate([plus.reshape(B * F, F), minus.reshape(B * F, F)], axis=0)
    out = disc.forward(stacked)
    d_plus = out[: B * F]
    d_minus = out[B * F :]
    return ((d_plus - d_minus) * (1.0 / (2.0 * h))).reshape(B, F)


def discriminator_loss(disc, ref_batch, pol_batch, w_gp=5.0, gp_eps=1e-3, bce=False):
    """Least-squares discriminator objective with gradient penalty.

    Reference transitions target +1 and policy transitions -1; the penalty
    is the mean squared input-gradient norm over the reference samples,
    computed with the differentiable finite-difference construction so only
    first-order backprop is needed.  Returns (loss Tensor, components dict).
    """
    if len(ref_batch) == 0 or len(pol_batch) == 0:
        raise ValueError("both batches must be nonempty")
    d_ref = disc.forward(np.asarray(ref_batch, dtype=np.float64))
    d_pol = disc.forward(np.asarray(pol_batch, dtype=np.float64))
    if bce:
        # cross-entropy form: D outputs a logit for "came from the reference"
        ref_term = softplus(-d_ref).mean()
        pol_term = softplus(d_pol).mean()
    else:
        ref_term = ((d_ref - 1.0) ** 2).mean()
        pol_term = ((d_pol + 1.0) ** 2).mean()

    components = {
        "ref_loss": float(ref_term.data),
        "pol_loss": float(pol_term.data),
        "d_ref_mean": float(d_ref.data.mean()),
        "d_pol_mean": float(d_pol.data.mean()),
    }
    loss = ref_term + pol_term
    if w_gp > 0.0:
        grad = input_gradient_fd(disc, ref_batch, h=gp_eps)
        gp = (grad**2).sum(axis=1).mean()
        components["grad_penalty"] = float(gp.data)
        loss = loss + w_gp * gp
    else:
        components["grad_penalty"] = 0.0
    components["total"] = float(loss.data)
    return loss, components


def softplus(x):
    """Numerically stable log(1 + exp(x)) on Tensors."""
    # log(1 + e^x) = max(x, 0) + log(1 + e^{-|x|})
    data = x.data
    pos = Tensor(np.maximum(data, 0.0))
    rest = (Tensor(np.exp(-np.abs(data))) + 1.0).log()
    # reconstruct with gradient: d softplus = sigmoid(x)
    sig = 1.0 / (1.0 + np.exp(-data))

    def bwd(g):
        x._accumulate(g * sig)

    return Tensor(pos.data + rest.data, _parents=(x,), _backward=bwd)


def style_reward(disc, feat_prev, feat_next, normalizer, bce=False):
    """Reward for observed transitions; consumes only state features and the
    discriminator (no reference indices or phase variables by construction)."""
    pairs = np.concatenate([feat_prev, feat_next], axis=1)
    pairs = normalizer.normalize_pairs(pairs)
    d = disc.forward(pairs).data[:, 0]
    return amp_reward_bce(d) if bce else amp_reward(d)
