"""Discrete motion-latent model: MLP encoder/decoder over fixed feature
windows with codebook quantization and straight-through training."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn import Mlp, Tensor, gather_rows, smooth_l1, stop_gradient


class Codebook:
    """K learnable code vectors of dimension d_c."""

    def __init__(self, k, d_c, rng=None, init=None):
        if k < 2:
            raise ValueError("codebook needs K >= 2")
        if init is not None:
            data = np.asarray(init, dtype=np.float64)
            if data.shape != (k, d_c):
                raise ValueError(f"init shape {data.shape} != ({k}, {d_c})")
        else:
            rng = rng if rng is not None else np.random.default_rng(0)
            data = rng.normal(0.0, 0.1, size=(k, d_c))
        self.codes = Tensor(data, requires_grad=True)

    @property
    def k(self):
        return self.codes.data.shape[0]

    @property
    def d_c(self):
        return self.codes.data.shape[1]


def quantize(codebook, z):
    """Nearest code by Euclidean distance; ties break to the lowest index.

    Returns (index, code vector copy).
    """
    z = np.asarray(z, dtype=np.float64)
    codes = codebook.codes.data if isinstance(codebook, Codebook) else np.asarray(codebook)
    if z.shape[-1] != codes.shape[1]:
        raise ValueError(f"latent dim {z.shape[-1]} != code dim {codes.shape[1]}")
    d = np.linalg.norm(codes - z, axis=1)
    idx = int(np.argmin(d))
    return idx, codes[idx].copy()


def quantize_batch(codes, zs):
    """Vectorized nearest-code indices for rows of ``zs``."""
    zs = np.asarray(zs, dtype=np.float64)
    d2 = ((zs[:, None, :] - codes[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


@dataclass
class VqVaeConfig:
    codebook_size: int = 64
    code_dim: int = 32
    window: int = 16
    downsample: int = 4
    beta: float = 0.25
    hidden: tuple = (128, 128)
    smooth_l1_delta: float = 1.0
    squared_latent_losses: bool = False

    def __post_init__(self):
        if self.window % self.downsample != 0:
            raise ValueError("window must be divisible by the downsampling rate")


class VqVaeModel:
    """Encoder/decoder over flattened (window x feature) blocks.

    The encoder emits window/downsample latents of code_dim each; every
    latent is snapped to its nearest codebook entry before decoding.
    Feature normalization statistics live inside the model so windows are
    encoded in a standardized space.
    """

    def __init__(self, feature_dim, config, rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.config = config
        self.feature_dim = feature_dim
        n_latents = config.window // config.downsample
        in_dim = config.window * feature_dim
        lat_dim = n_latents * config.code_dim
        self.encoder = Mlp([in_dim, *config.hidden, lat_dim], rng=rng)
        self.decoder = Mlp([lat_dim, *config.hidden, in_dim], rng=rng)
        self.codebook = Codebook(config.codebook_size, config.code_dim, rng=rng)
        self.feat_mean = np.zeros(feature_dim)
        self.feat_std = np.ones(feature_dim)

    @property
    def n_latents(self):
        return self.config.window // self.config.downsample

    def params(self):
        return self.encoder.params() + self.decoder.params() + [self.codebook.codes]

    def set_normalization(self, mean, std):
        self.feat_mean = np.asarray(mean, dtype=np.float64)
        self.feat_std = np.maximum(np.asarray(std, dtype=np.float64), 1e-6)

    def normalize(self, windows):
        return (windows - self.feat_mean) / self.feat_std

    def denormalize(self, windows):
        return windows * self.feat_std + self.feat_mean

    def _flatten(self, windows):
        windows = np.asarray(windows, dtype=np.float64)
        single = windows.ndim == 2
        if single:
            windows = windows[None]
        if windows.shape[1:] != (self.config.window, self.feature_dim):
            raise ValueError(
                f"window shape {windows.shape[1:]} != "
                f"({self.config.window}, {self.feature_dim})"
            )
        flat = self.normalize(windows).reshape(windows.shape[0], -1)
        return flat, single

    def encode_indices(self, windows):
        """Codebook indices per sub-window (eval path, no graph)."""
        flat, single = self._flatten(windows)
        z = self.encoder.forward(flat).data
        zs = z.reshape(-1, self.config.code_dim)
        idx = quantize_batch(self.codebook.codes.data, zs)
        idx = idx.reshape(flat.shape[0], self.n_latents)
        return idx[0] if single else idx

    def decode_indices(self, indices):
        """Reconstruct feature windows from codebook indices."""
        indices = np.asarray(indices, dtype=np.intp)
        single = indices.ndim == 1
        if single:
            indices = indices[None]
        z_hat = self.codebook.codes.data[indices].reshape(indices.shape[0], -1)
        flat = self.decoder.forward(z_hat).data
        out = self.denormalize(flat.reshape(-1, self.config.window, self.feature_dim))
        return out[0] if single else out


def encode_decode(model, windows):
    """Quantize-and-reconstruct in eval mode.

    Returns (indices, reconstruction) where the reconstruction is in the raw
    feature space of the input window(s).
    """
    idx = model.encode_indices(windows)
    recon = model.decode_indices(idx)
    return idx, recon


def vqvae_loss(model, windows):
    """Three-term objective on a batch of raw feature windows.

    Returns a dict of Tensors: l_re (smooth-L1 reconstruction), l_embed
    (pulls encoder outputs toward their codes), l_commit (pulls codes toward
    encoder outputs; the two differ only in gradient routing), and l_total =
    l_re + l_embed + beta * l_commit.  The decoder input uses the
    straight-through estimator so l_re still reaches the encoder.
    """
    flat, _ = model._flatten(windows)
    cfg = model.config
    x = Tensor(flat)
    z = model.encoder.forward(x)
    z_rows = z.data.reshape(-1, cfg.code_dim)
    idx = quantize_batch(model.codebook.codes.data, z_rows)
    z_hat = gather_rows(model.codebook.codes, idx).reshape(z.data.shape)

    dec_in = z + stop_gradient(Tensor(z_hat.data - z.data))
    recon = model.decoder.forward(dec_in)
    l_re = smooth_l1(recon, flat, delta=cfg.smooth_l1_delta)

    d_embed = z - stop_gradient(z_hat)
    d_commit = stop_gradient(z) - z_hat
    if cfg.squared_latent_losses:
        l_embed = (d_embed**2).sum(axis=1).mean()
        l_commit = (d_commit**2).sum(axis=1).mean()
    else:
        # sqrt's backward takes the zero subgradient at exactly zero distance
        l_embed = (d_embed**2).sum(axis=1).sqrt().mean()
        l_commit = (d_commit**2).sum(axis=1).sqrt().mean()

    l_total = l_re + l_embed + cfg.beta * l_commit
    return {
        "l_re": l_re,
        "l_embed": l_embed,
        "l_commit": l_commit,
        "l_total": l_total,
        "indices": idx,
    }
