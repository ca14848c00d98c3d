"""Generative models, their training loops, sampling and checkpoints."""

from __future__ import annotations

import csv
import io
import os
import struct
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from topogen.autodiff.network import Network, grad_params, read_network, write_network
from topogen.autodiff.optim import RMSProp
from topogen.errors import DivergenceError, InputError
from topogen.genmodels import losses
from topogen.genmodels.config import GAN_KINDS, TrainConfig, config_from_mapping, parse_kv
from topogen.pointcloud import PointCloud

MODEL_MAGIC = b"TGMODEL"
MODEL_VERSION = 1


@dataclass
class GenerativeModel:
    """A generator (or decoder) ``Z -> X`` plus its critic or encoder.

    ``companion`` is the critic ``d -> 1`` for the GAN kinds and the encoder
    for the auto-encoders (``d -> 2 * latent`` for the VAE: means then
    log-variances).
    """

    config: TrainConfig
    generator: Network
    companion: Network

    def __post_init__(self):
        lat, d = self.latent_dim, self.data_dim
        if self.generator.in_dim != lat:
            raise InputError(f"generator input {self.generator.in_dim} != latent_dim {lat}")
        expect = {"vae": (d, 2 * lat), "wae": (d, lat)}.get(self.kind, (d, 1))
        got = (self.companion.in_dim, self.companion.out_dim)
        if got != expect:
            raise InputError(f"{self.kind} companion network maps {got[0]}->{got[1]}, "
                             f"expected {expect[0]}->{expect[1]}")

    @property
    def kind(self) -> str:
        return self.config.kind

    @property
    def latent_dim(self) -> int:
        return self.config.latent_dim

    @property
    def data_dim(self) -> int:
        return self.generator.out_dim

    @property
    def prior(self) -> str:
        return "normal" if self.kind == "vae" else "uniform"

    @property
    def critic(self) -> Network:
        if self.kind not in GAN_KINDS:
            raise AttributeError(f"{self.kind} has no critic")
        return self.companion

    @property
    def encoder(self) -> Network:
        if self.kind in GAN_KINDS:
            raise AttributeError(f"{self.kind} has no encoder")
        return self.companion

    def copy(self) -> "GenerativeModel":
        return GenerativeModel(self.config.replace(), self.generator.copy(), self.companion.copy())

    def encode(self, x: np.ndarray) -> np.ndarray:
        """Deterministic code: the encoder output, or the posterior mean for the VAE."""
        h = self.encoder(x)
        return h[:, :self.latent_dim]

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        return self.generator(self.encode(x))


def build_model(kind: str, data_dim: int, cfg: Optional[TrainConfig] = None) -> GenerativeModel:
    """Freshly initialized model; weights are drawn from ``cfg.seed``."""
    cfg = TrainConfig(kind=kind) if cfg is None else cfg.replace(kind=kind)
    if data_dim < 1:
        raise InputError("data_dim must be >= 1")
    rng = np.random.default_rng(cfg.seed)
    lat, hid = cfg.latent_dim, cfg.hidden
    generator = Network.init((lat, *hid, data_dim), rng, cfg.activation)
    out = {"vae": 2 * lat, "wae": lat}.get(cfg.kind, 1)
    companion = Network.init((data_dim, *hid, out), rng, cfg.activation)
    return GenerativeModel(cfg, generator, companion)


def _prior(model: GenerativeModel, m: int, rng) -> np.ndarray:
    return losses.sample_prior(m, model.latent_dim, rng, model.prior)


def generate(model: GenerativeModel, m: int, seed=0) -> PointCloud:
    """``m`` generated points: the generator applied to ``m`` prior draws."""
    return PointCloud(model.generator(_prior(model, m, seed)))


# ---- training ----

class TracePoint(NamedTuple):
    step: int
    loss_name: str
    value: float


def _check(step: int, name: str, value: float) -> TracePoint:
    if not np.isfinite(value):
        raise DivergenceError(step, name, value)
    return TracePoint(step, name, value)


def _optimizer(cfg: TrainConfig) -> RMSProp:
    return RMSProp(cfg.lr, cfg.rho, cfg.eps)


def train(model: GenerativeModel, data: Union[PointCloud, np.ndarray],
          cfg: Optional[TrainConfig] = None) -> tuple[GenerativeModel, list[TracePoint]]:
    """Train a copy of ``model`` on ``data`` for ``cfg.steps`` steps.

    GAN kinds take ``cfg.n_critic`` critic updates per generator update; one
    step is one generator update. Auto-encoders update encoder and decoder
    jointly. Batches, priors and penalty weights come from a stream seeded by
    ``cfg.seed`` alone, so equal seeds give bit-identical parameters.

    Returns:
        The trained copy and the loss trace, one entry per loss per step.

    Raises:
        DivergenceError: a loss became non-finite.
    """
    cfg = model.config if cfg is None else cfg
    if cfg.kind != model.kind:
        raise InputError(f"config kind {cfg.kind} does not match model kind {model.kind}")
    x_all = data.points if isinstance(data, PointCloud) else np.asarray(data, dtype=np.float64)
    if x_all.ndim != 2 or x_all.shape[1] != model.data_dim:
        raise InputError(f"data shape {x_all.shape} does not match model data dim {model.data_dim}")
    if cfg.steps and len(x_all) < cfg.batch_size:
        raise InputError(f"batch_size {cfg.batch_size} exceeds the {len(x_all)} data rows")

    trained = GenerativeModel(cfg, model.generator.copy(), model.companion.copy())
    rng = np.random.default_rng([cfg.seed, 1])
    loop = _train_gan if cfg.kind in GAN_KINDS else _train_ae
    trace = loop(trained, x_all, cfg, rng)
    return trained, trace


def _batch(x_all: np.ndarray, m: int, rng) -> np.ndarray:
    return x_all[rng.choice(len(x_all), size=m, replace=False)]


def _train_gan(model: GenerativeModel, x_all, cfg: TrainConfig, rng) -> list[TracePoint]:
    G, f = model.generator, model.companion
    opt_g, opt_f = _optimizer(cfg), _optimizer(cfg)
    m = cfg.batch_size
    trace = []
    for step in range(1, cfg.steps + 1):
        for _ in range(cfg.n_critic):
            x = _batch(x_all, m, rng)
            z = _prior(model, m, rng)
            u = rng.uniform(size=m)
            tape, parts = losses.critic_objective(f, G(z), x, cfg.lam, u)
            value = float(parts.critic_loss.value)
            _check(step, "critic", value)
            opt_f.step(f, grad_params(tape, parts.critic_loss, f))
        trace.append(TracePoint(step, "critic", value))
        if parts.penalty is not None:
            trace.append(_check(step, "penalty", float(parts.penalty.value)))

        z = _prior(model, m, rng)
        tape, gen = losses.generator_objective(f, G, z)
        trace.append(_check(step, "generator", float(gen.value)))
        opt_g.step(G, grad_params(tape, gen, G))
    return trace


def _train_ae(model: GenerativeModel, x_all, cfg: TrainConfig, rng) -> list[TracePoint]:
    dec, enc = model.generator, model.companion
    opt_d, opt_e = _optimizer(cfg), _optimizer(cfg)
    m = cfg.batch_size
    reg_name = "kl" if cfg.kind == "vae" else "mmd"
    trace = []
    for step in range(1, cfg.steps + 1):
        x = _batch(x_all, m, rng)
        if cfg.kind == "vae":
            noise = rng.standard_normal(size=(m, model.latent_dim))
            tape, parts = losses.vae_objective(enc, dec, x, noise)
        else:
            z = _prior(model, m, rng)
            tape, parts = losses.wae_objective(enc, dec, x, z, cfg.lam, cfg.kernel, cfg.scale)
        trace.append(_check(step, "loss", float(parts.loss.value)))
        trace.append(_check(step, "reconstruction", float(parts.reconstruction.value)))
        trace.append(_check(step, reg_name, float(parts.regularizer.value)))
        g = grad_params(tape, parts.loss)
        ne = enc.n_params
        opt_e.step(enc, g[:ne])
        opt_d.step(dec, g[ne:])
    return trace


def reconstruction_error(model: GenerativeModel, data: Union[PointCloud, np.ndarray]) -> float:
    """Mean squared reconstruction error of an auto-encoder on ``data``."""
    x = data.points if isinstance(data, PointCloud) else np.asarray(data, dtype=np.float64)
    r = model.reconstruct(x) - x
    return float(np.mean(np.sum(r * r, axis=1)))


# ---- loss trace CSV ----

def write_trace(trace, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "loss_name", "value"])
        for p in trace:
            w.writerow([p.step, p.loss_name, repr(float(p.value))])


def read_trace(path) -> list[TracePoint]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["step", "loss_name", "value"]:
        raise InputError(f"{path}: not a loss trace")
    return [TracePoint(int(s), name, float(v)) for s, name, v in rows[1:]]


# ---- model checkpoints ----
# magic "TGMODEL", u16 version, u32 length + utf-8 config text, then the
# generator and the companion network in the network checkpoint format.

def save_model(model: GenerativeModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(model_to_bytes(model))


def model_to_bytes(model: GenerativeModel) -> bytes:
    buf = io.BytesIO()
    text = model.config.to_text().encode("utf-8")
    buf.write(MODEL_MAGIC)
    buf.write(struct.pack("<HI", MODEL_VERSION, len(text)))
    buf.write(text)
    write_network(model.generator, buf)
    write_network(model.companion, buf)
    return buf.getvalue()


def model_from_bytes(data: bytes, source: str = "<checkpoint>") -> GenerativeModel:
    if not data.startswith(MODEL_MAGIC):
        raise InputError(f"{source}: not a model checkpoint (bad magic)")
    buf = io.BytesIO(data)
    buf.read(len(MODEL_MAGIC))
    head = buf.read(6)
    if len(head) != 6:
        raise InputError(f"{source}: truncated checkpoint")
    version, n = struct.unpack("<HI", head)
    if version != MODEL_VERSION:
        raise InputError(f"{source}: unsupported model checkpoint version {version}")
    text = buf.read(n)
    if len(text) != n:
        raise InputError(f"{source}: truncated checkpoint")
    cfg = config_from_mapping(parse_kv(text.decode("utf-8"), source), source=source)
    generator = read_network(buf)
    companion = read_network(buf)
    if buf.read(1):
        raise InputError(f"{source}: trailing bytes after checkpoint")
    return GenerativeModel(cfg, generator, companion)


def load_model(path) -> GenerativeModel:
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise InputError(f"checkpoint not found: {path}")
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read(), path)
