from .model import (
    Codebook,
    VqVaeConfig,
    VqVaeModel,
    encode_decode,
    quantize,
    quantize_batch,
    vqvae_loss,
)
from .training import (
    TrainingDiverged,
    VqVaeTrainConfig,
    codebook_usage,
    constant_predictor_baseline,
    corpus_windows,
    heldout_reconstruction_error,
    train_vqvae,
    windows_from_clip,
)

__all__ = [
    "Codebook",
    "TrainingDiverged",
    "VqVaeConfig",
    "VqVaeModel",
    "VqVaeTrainConfig",
    "codebook_usage",
    "constant_predictor_baseline",
    "corpus_windows",
    "encode_decode",
    "heldout_reconstruction_error",
    "quantize",
    "quantize_batch",
    "train_vqvae",
    "vqvae_loss",
    "windows_from_clip",
]
