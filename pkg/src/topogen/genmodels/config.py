"""Training configuration and its plain-text key-value file format."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Optional, Union

from topogen.autodiff import optim
from topogen.errors import InputError

KINDS = ("gp-wgan", "wgan", "wae", "vae")
GAN_KINDS = ("gp-wgan", "wgan")
DEFAULT_LAMBDA = {"gp-wgan": 10.0, "wgan": 0.0, "wae": 10.0, "vae": 0.0}


@dataclass
class TrainConfig:
    kind: str = "gp-wgan"
    steps: int = 2000
    batch_size: int = 64
    lam: Optional[float] = None  # None -> per-kind default
    lr: float = optim.LR
    rho: float = optim.RHO
    eps: float = optim.EPS
    n_critic: int = 5
    seed: int = 0
    latent_dim: int = 2
    hidden: tuple[int, ...] = (64, 64)
    activation: str = "relu"
    kernel: str = "imq"
    kernel_scale: Optional[float] = None  # None -> 2 * latent_dim
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.kind = normalize_kind(self.kind)
        if self.lam is None:
            self.lam = DEFAULT_LAMBDA[self.kind]
        self.hidden = tuple(int(h) for h in self.hidden)
        self.validate()

    def validate(self) -> None:
        if self.batch_size < 2:
            raise InputError("batch_size must be >= 2")
        if self.lam < 0:
            raise InputError("lambda must be >= 0")
        if self.steps < 0:
            raise InputError("steps must be >= 0")
        if self.n_critic < 1:
            raise InputError("n_critic must be >= 1")
        if self.latent_dim < 1:
            raise InputError("latent_dim must be >= 1")
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise InputError("hidden sizes must be positive")
        if self.activation not in ("relu", "tanh"):
            raise InputError("activation must be relu or tanh")
        if self.kernel not in ("imq", "rbf"):
            raise InputError("kernel must be imq or rbf")
        if not (self.lr > 0 and 0 <= self.rho < 1 and self.eps > 0):
            raise InputError("need lr > 0, 0 <= rho < 1, eps > 0")

    @property
    def scale(self) -> float:
        return 2.0 * self.latent_dim if self.kernel_scale is None else float(self.kernel_scale)

    def to_items(self) -> list[tuple[str, str]]:
        items = [
            ("kind", self.kind),
            ("steps", str(self.steps)),
            ("batch_size", str(self.batch_size)),
            ("lambda", repr(float(self.lam))),
            ("lr", repr(float(self.lr))),
            ("rho", repr(float(self.rho))),
            ("eps", repr(float(self.eps))),
            ("n_critic", str(self.n_critic)),
            ("seed", str(self.seed)),
            ("latent_dim", str(self.latent_dim)),
            ("hidden", ",".join(str(h) for h in self.hidden)),
            ("activation", self.activation),
            ("kernel", self.kernel),
        ]
        if self.kernel_scale is not None:
            items.append(("kernel_scale", repr(float(self.kernel_scale))))
        return items

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_items())

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)


def normalize_kind(kind: str) -> str:
    k = kind.strip().lower().replace("_", "-")
    if k in ("gpwgan", "wgan-gp"):
        k = "gp-wgan"
    if k not in KINDS:
        raise InputError(f"unknown model kind {kind!r}; expected one of {', '.join(KINDS)}")
    return k


def parse_kv(text: str, source: str = "<config>") -> dict[str, str]:
    """``key = value`` (or ``key: value``) lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = line.split(sep, 1)
                break
        else:
            raise InputError(f"{source}: line {lineno}: expected 'key = value'")
        out[key.strip().lower()] = value.strip()
    return out


_INT_KEYS = {"steps", "batch_size", "n_critic", "seed", "latent_dim"}
_FLOAT_KEYS = {"lambda", "lr", "rho", "eps", "kernel_scale"}


def config_from_mapping(kv: dict, base: Optional[TrainConfig] = None, source: str = "<config>") -> TrainConfig:
    fields = {} if base is None else {f.name: getattr(base, f.name) for f in dataclasses.fields(base)
                                      if f.name != "extra"}
    if base is not None and "kind" in kv and "lambda" not in kv:
        fields["lam"] = None
    extra = {}
    for key, value in kv.items():
        try:
            if key in _INT_KEYS:
                fields[key] = int(value)
            elif key in _FLOAT_KEYS:
                fields["lam" if key == "lambda" else key] = float(value)
            elif key == "hidden":
                fields["hidden"] = tuple(int(h) for h in value.replace(" ", "").split(",") if h)
            elif key in ("kind", "activation", "kernel"):
                fields[key] = value
            else:
                extra[key] = value
        except ValueError:
            raise InputError(f"{source}: bad value for {key!r}: {value!r}") from None
    fields["extra"] = extra
    return TrainConfig(**fields)


def load_config(path: Union[str, os.PathLike], base: Optional[TrainConfig] = None) -> TrainConfig:
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise InputError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return config_from_mapping(parse_kv(fh.read(), path), base, path)
