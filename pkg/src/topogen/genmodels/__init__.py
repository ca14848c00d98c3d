"""GP-WGAN, WGAN, WAE-MMD and VAE models with their training loops."""

from topogen.genmodels.config import DEFAULT_LAMBDA, KINDS, TrainConfig, load_config
from topogen.genmodels.losses import mmd2_unbiased, sample_prior, vae_loss, wae_mmd_loss, wgan_losses
from topogen.genmodels.model import (
    GenerativeModel,
    TracePoint,
    build_model,
    generate,
    load_model,
    reconstruction_error,
    save_model,
    train,
    write_trace,
)

__all__ = [
    "DEFAULT_LAMBDA",
    "KINDS",
    "GenerativeModel",
    "TracePoint",
    "TrainConfig",
    "build_model",
    "generate",
    "load_config",
    "load_model",
    "mmd2_unbiased",
    "reconstruction_error",
    "sample_prior",
    "save_model",
    "train",
    "vae_loss",
    "wae_mmd_loss",
    "wgan_losses",
    "write_trace",
]
