"""Adam optimizer with bias correction, plus global-norm gradient clipping."""

from __future__ import annotations

import numpy as np


class NonFiniteGradError(ValueError):
    """A gradient contained NaN/Inf; the step was rejected, params untouched."""


class AdamState:
    """First/second moment buffers and the shared step counter."""

    def __init__(self, params):
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self.step = 0


def adam_step(params, grads, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Apply one bias-corrected Adam update in place.

    Raises NonFiniteGradError before touching any parameter if a gradient is
    non-finite; the caller decides whether to skip or abort.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params/grads/state length mismatch")
    for p, g in zip(params, grads):
        if g.shape != p.data.shape:
            raise ValueError(f"grad shape {g.shape} != param shape {p.data.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradError("non-finite gradient; step rejected")
    state.step += 1
    t = state.step
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p.data = p.data - lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def clip_global_norm(grads, max_norm=1.0):
    """Scale all gradients so their joint Euclidean norm is <= max_norm."""
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if total > max_norm and total > 0.0:
        scale = max_norm / total
        grads = [g * scale for g in grads]
    return grads, total
