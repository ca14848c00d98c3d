"""Objectives of the four generative models.

Each ``*_objective`` records the loss on a fresh tape with the trainable
networks bound as leaves and returns the tape, the loss node and its
components. The public ``*_loss``/``*_losses`` helpers return plain floats.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from topogen.autodiff import tape as T
from topogen.autodiff.network import Network, forward, frozen_params, penalty_on_tape
from topogen.autodiff.tape import Node, Tape
from topogen.errors import InputError

LOGVAR_CLAMP = (-10.0, 10.0)


def sample_prior(m: int, latent_dim: int, seed, dist: str = "uniform") -> np.ndarray:
    """``m`` i.i.d. latent draws, uniform on ``[-1, 1]^latent_dim`` or standard normal."""
    if m < 1:
        raise InputError("prior sample size must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if dist == "uniform":
        return rng.uniform(-1.0, 1.0, size=(m, latent_dim))
    if dist == "normal":
        return rng.standard_normal(size=(m, latent_dim))
    raise InputError(f"unknown prior {dist!r}")


def interpolate(x: np.ndarray, fake: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Points ``u * x + (1 - u) * fake`` with one ``u`` per row."""
    u = np.asarray(u, dtype=np.float64).reshape(-1, 1)
    return u * x + (1.0 - u) * fake


# ---- Wasserstein GAN with gradient penalty ----

class GANParts(NamedTuple):
    critic_loss: Node
    penalty: Optional[Node]


def critic_objective(critic: Network, fake: np.ndarray, x: np.ndarray, lam: float,
                     u: np.ndarray) -> tuple[Tape, GANParts]:
    """``mean f(fake) - mean f(x) + lam * penalty`` with the critic trainable."""
    tape = Tape()
    params = tape.bind(critic)
    loss = forward(critic, fake, tape, params).mean() - forward(critic, x, tape, params).mean()
    pen = None
    if lam > 0:
        pen = penalty_on_tape(critic, interpolate(x, fake, u), tape, params, lam)
        loss = loss + pen
    return tape, GANParts(loss, pen)


def generator_objective(critic: Network, generator: Network, z: np.ndarray) -> tuple[Tape, Node]:
    """``-mean f(G(z))`` with the generator trainable and the critic frozen."""
    tape = Tape()
    gparams = tape.bind(generator)
    fake = forward(generator, z, tape, gparams)
    score = forward(critic, fake, tape, frozen_params(critic, tape))
    return tape, -score.mean()


class WGANLosses(NamedTuple):
    critic: float
    generator: float
    penalty: float


def wgan_losses(critic: Network, generator: Network, x_batch: np.ndarray, z_batch: np.ndarray,
                lam: float, u: Optional[np.ndarray] = None, seed=None) -> WGANLosses:
    """Critic and generator losses for one batch pair.

    ``u`` holds the per-sample interpolation weights of the penalty points;
    it is drawn uniformly on [0, 1] from ``seed`` when absent. ``lam = 0``
    gives the plain WGAN objective.
    """
    x_batch = np.asarray(x_batch, dtype=np.float64)
    z_batch = np.asarray(z_batch, dtype=np.float64)
    if len(x_batch) != len(z_batch):
        raise InputError(f"batch sizes differ: {len(x_batch)} data rows, {len(z_batch)} latents")
    if u is None:
        u = np.random.default_rng(seed).uniform(size=len(x_batch))
    fake = generator(z_batch)
    _, parts = critic_objective(critic, fake, x_batch, lam, u)
    _, gen = generator_objective(critic, generator, z_batch)
    pen = 0.0 if parts.penalty is None else float(parts.penalty.value)
    return WGANLosses(float(parts.critic_loss.value), float(gen.value), pen)


# ---- Wasserstein auto-encoder with an MMD latent penalty ----

def _sq_dists(a, b):
    """Pairwise squared distances between rows; ``a``/``b`` are nodes or arrays."""
    aa = (a * a).sum(axis=1)
    bb = (b * b).sum(axis=1)
    m, n = a.shape[0], b.shape[0]
    return T.reshape(aa, (m, 1)) + T.reshape(bb, (1, n)) - (a @ b.T) * 2.0


def kernel_matrix(d2, kernel: str, scale: float):
    if kernel == "imq":
        return scale / (d2 + scale)
    if kernel == "rbf":
        return T.exp(d2 * (-1.0 / scale))
    raise InputError(f"unknown kernel {kernel!r}")


def mmd2_unbiased(q: Node, p, kernel: str = "imq", scale: float = 4.0) -> Node:
    """Unbiased MMD^2 U-statistic between the rows of ``q`` and ``p``.

    Diagonal terms are left out of both within-sample sums.
    """
    m = q.shape[0]
    if m < 2 or p.shape[0] != m:
        raise InputError("MMD needs two samples of equal size >= 2")
    tape = q.tape
    p = p if isinstance(p, Node) else tape.constant(p)
    off = 1.0 - np.eye(m)
    kqq = (kernel_matrix(_sq_dists(q, q), kernel, scale) * off).sum()
    kpp = (kernel_matrix(_sq_dists(p, p), kernel, scale) * off).sum()
    kqp = kernel_matrix(_sq_dists(q, p), kernel, scale).sum()
    return (kqq + kpp) * (1.0 / (m * (m - 1))) - kqp * (2.0 / (m * m))


def reconstruction(x, x_rec: Node) -> Node:
    """Mean over rows of the squared Euclidean error."""
    r = x_rec - x
    return (r * r).sum(axis=1).mean()


class AEParts(NamedTuple):
    loss: Node
    reconstruction: Node
    regularizer: Node


def wae_objective(encoder: Network, decoder: Network, x: np.ndarray, z_prior: np.ndarray,
                  lam: float, kernel: str = "imq", scale: float = 4.0) -> tuple[Tape, AEParts]:
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 2 or len(z_prior) != len(x):
        raise InputError("WAE needs equal data and prior batches of size >= 2")
    tape = Tape()
    eparams = tape.bind(encoder)
    dparams = tape.bind(decoder)
    code = forward(encoder, x, tape, eparams)
    rec = reconstruction(x, forward(decoder, code, tape, dparams))
    mmd = mmd2_unbiased(code, np.asarray(z_prior, dtype=np.float64), kernel, scale)
    return tape, AEParts(rec + mmd * lam, rec, mmd)


def wae_mmd_loss(encoder: Network, decoder: Network, x_batch, z_prior_batch, lam: float,
                 kernel: str = "imq", scale: float = 4.0) -> float:
    _, parts = wae_objective(encoder, decoder, x_batch, z_prior_batch, lam, kernel, scale)
    return float(parts.loss.value)


# ---- variational auto-encoder ----

def gaussian_kl(mu, logvar) -> Node:
    """Mean over rows of KL(N(mu, exp(logvar)) || N(0, I))."""
    return ((mu * mu + T.exp(logvar) - logvar - 1.0).sum(axis=1) * 0.5).mean()


def vae_objective(encoder: Network, decoder: Network, x: np.ndarray,
                  noise: np.ndarray) -> tuple[Tape, AEParts]:
    """Squared-error reconstruction plus closed-form KL, reparameterized through ``noise``."""
    x = np.asarray(x, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    latent = encoder.out_dim // 2
    if noise.shape != (len(x), latent):
        raise InputError(f"noise must have shape {(len(x), latent)}, got {noise.shape}")
    tape = Tape()
    eparams = tape.bind(encoder)
    dparams = tape.bind(decoder)
    h = forward(encoder, x, tape, eparams)
    mu = h[:, :latent]
    logvar = T.clip(h[:, latent:], *LOGVAR_CLAMP)
    z = mu + T.exp(logvar * 0.5) * noise
    rec = reconstruction(x, forward(decoder, z, tape, dparams))
    kl = gaussian_kl(mu, logvar)
    return tape, AEParts(rec + kl, rec, kl)


def vae_loss(encoder: Network, decoder: Network, x_batch, noise_batch) -> float:
    _, parts = vae_objective(encoder, decoder, x_batch, noise_batch)
    return float(parts.loss.value)
