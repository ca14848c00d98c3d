"""Multilayer perceptrons on the tape, their gradients and checkpoint format."""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from topogen.autodiff import tape as T
from topogen.autodiff.tape import Node, Tape, grad
from topogen.errors import InputError

ACTIVATIONS = ("identity", "relu", "tanh", "sigmoid")
HIDDEN_ACTIVATIONS = ("relu", "tanh")

_NP_ACT = {
    "identity": lambda v: v,
    "relu": lambda v: np.maximum(v, 0.0),
    "tanh": np.tanh,
    "sigmoid": lambda v: 0.5 * (1.0 + np.tanh(0.5 * v)),
}
_TAPE_ACT = {
    "identity": lambda v: v,
    "relu": T.relu,
    "tanh": T.tanh,
    "sigmoid": T.sigmoid,
}

CHECKPOINT_MAGIC = b"TGNET"
CHECKPOINT_VERSION = 1


@dataclass
class Network:
    """Fully connected net; layer ``l`` computes ``act_l(x @ W_l + b_l)``.

    ``weights[l]`` has shape ``(sizes[l], sizes[l+1])``.
    """

    sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: tuple[str, ...]

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        self.activations = tuple(self.activations)
        L = len(self.sizes) - 1
        if L < 1:
            raise InputError("a network needs at least one layer")
        if len(self.weights) != L or len(self.biases) != L or len(self.activations) != L:
            raise InputError("weights, biases and activations must have one entry per layer")
        for l in range(L):
            if self.weights[l].shape != (self.sizes[l], self.sizes[l + 1]):
                raise InputError(f"layer {l}: weight shape {self.weights[l].shape} does not chain")
            if self.biases[l].shape != (self.sizes[l + 1],):
                raise InputError(f"layer {l}: bias shape {self.biases[l].shape}")
            if self.activations[l] not in ACTIVATIONS:
                raise InputError(f"unknown activation {self.activations[l]!r}")

    @classmethod
    def init(cls, sizes: Sequence[int], rng: np.random.Generator, hidden: str = "relu",
             output: str = "identity") -> "Network":
        """Glorot-uniform weights, zero biases."""
        if hidden not in HIDDEN_ACTIVATIONS:
            raise InputError(f"hidden activation must be one of {HIDDEN_ACTIVATIONS}")
        sizes = tuple(int(s) for s in sizes)
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        acts = (hidden,) * (len(sizes) - 2) + (output,)
        return cls(sizes, weights, biases, acts)

    @property
    def n_params(self) -> int:
        return sum((a + 1) * b for a, b in zip(self.sizes[:-1], self.sizes[1:]))

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def flat(self) -> np.ndarray:
        parts = []
        for W, b in zip(self.weights, self.biases):
            parts.append(W.ravel())
            parts.append(b)
        return np.concatenate(parts)

    def set_flat(self, vec: np.ndarray) -> None:
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.n_params,):
            raise InputError(f"expected {self.n_params} parameters, got {vec.shape}")
        k = 0
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[l] = vec[k:k + W.size].reshape(W.shape).copy()
            k += W.size
            self.biases[l] = vec[k:k + b.size].copy()
            k += b.size

    def copy(self) -> "Network":
        return Network(self.sizes, [W.copy() for W in self.weights],
                       [b.copy() for b in self.biases], self.activations)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Plain numpy forward pass (no tape)."""
        h = np.asarray(x, dtype=np.float64)
        for W, b, act in zip(self.weights, self.biases, self.activations):
            h = _NP_ACT[act](h @ W + b)
        return h


def forward(net: Network, batch, tape: Tape, params: Optional[Sequence[Node]] = None) -> Node:
    """Record ``net(batch)`` on ``tape``.

    ``params`` are the net's parameter nodes; if omitted the net is bound as
    fresh leaves (``tape.bind``). Pass constants instead to freeze a net.
    """
    x = batch if isinstance(batch, Node) else tape.constant(np.asarray(batch, dtype=np.float64))
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise InputError(f"input shape {x.shape} does not match network input size {net.in_dim}")
    if params is None:
        params = tape.bind(net)
    h = x
    for l, act in enumerate(net.activations):
        h = _TAPE_ACT[act](h @ params[2 * l] + params[2 * l + 1])
    return h


def frozen_params(net: Network, tape: Tape) -> list[Node]:
    """Parameters of ``net`` as constants: gradients do not flow into them."""
    out = []
    for W, b in zip(net.weights, net.biases):
        out.append(tape.constant(W))
        out.append(tape.constant(b))
    return out


def _flatten(grads: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([np.ravel(g) for g in grads])


def grad_params(tape: Tape, loss: Node, net: Optional[Network] = None) -> np.ndarray:
    """Flat gradient of a scalar loss over the parameters of ``net``.

    Without ``net``, over every network bound on the tape, in binding order.
    """
    if loss.value.size != 1:
        raise InputError(f"loss must be scalar, got shape {loss.shape}")
    if net is not None:
        leaves = tape.params_of(net)
    else:
        leaves = [leaf for _, ls in tape.bindings for leaf in ls]
    return _flatten(grad(loss, leaves))


def grad_input(tape: Tape, loss: Node, input_node: Node) -> np.ndarray:
    if loss.value.size != 1:
        raise InputError(f"loss must be scalar, got shape {loss.shape}")
    return grad(loss, [input_node])[0]


NORM_EPS = 1e-12


def penalty_on_tape(net: Network, x_hat, tape: Tape, params: Sequence[Node], lam: float,
                    norm_eps: float = NORM_EPS) -> Node:
    """``lam * mean_i (|grad_x f(x_i)| - 1)^2`` as a differentiable node.

    The inner input gradient is built with ``create_graph=True`` so the
    penalty can be differentiated with respect to the parameters. The norm is
    ``sqrt(|g|^2 + norm_eps)`` to stay differentiable at ``g = 0``.
    """
    x = tape.variable(np.asarray(x_hat, dtype=np.float64))
    f = forward(net, x, tape, params)
    if f.shape[1] != 1:
        raise InputError("the gradient penalty needs a scalar-output network")
    (g,) = grad(f.sum(), [x], create_graph=True)
    norms = T.sqrt((g * g).sum(axis=1) + norm_eps)
    dev = norms - 1.0
    return (dev * dev).mean() * lam


def grad_of_gradient_penalty(net: Network, x_hat: np.ndarray, lam: float,
                             norm_eps: float = NORM_EPS) -> tuple[float, np.ndarray]:
    """Penalty value and its exact gradient over the parameters of ``net``."""
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x_hat.ndim != 2 or len(x_hat) == 0:
        raise InputError("x_hat must be a nonempty 2-D batch")
    tape = Tape()
    params = tape.bind(net)
    pen = penalty_on_tape(net, x_hat, tape, params, lam, norm_eps)
    return float(pen.value), grad_params(tape, pen, net)


# ---- checkpoint format ----
# magic "TGNET", u16 version, u32 layer count L, u32 sizes[L+1],
# L length-prefixed ascii activation names, then every parameter as <f8 in
# flat() order.

def write_network(net: Network, fh) -> None:
    L = len(net.sizes) - 1
    fh.write(CHECKPOINT_MAGIC)
    fh.write(struct.pack("<HI", CHECKPOINT_VERSION, L))
    fh.write(struct.pack(f"<{L + 1}I", *net.sizes))
    for act in net.activations:
        name = act.encode("ascii")
        fh.write(struct.pack("<B", len(name)))
        fh.write(name)
    fh.write(net.flat().astype("<f8").tobytes())


def read_network(fh) -> Network:
    magic = fh.read(len(CHECKPOINT_MAGIC))
    if magic != CHECKPOINT_MAGIC:
        raise InputError("not a network checkpoint (bad magic)")
    version, L = struct.unpack("<HI", _read_exact(fh, 6))
    if version != CHECKPOINT_VERSION:
        raise InputError(f"unsupported network checkpoint version {version}")
    sizes = struct.unpack(f"<{L + 1}I", _read_exact(fh, 4 * (L + 1)))
    acts = []
    for _ in range(L):
        (k,) = struct.unpack("<B", _read_exact(fh, 1))
        acts.append(_read_exact(fh, k).decode("ascii"))
    n = sum((a + 1) * b for a, b in zip(sizes[:-1], sizes[1:]))
    vec = np.frombuffer(_read_exact(fh, 8 * n), dtype="<f8").astype(np.float64)
    net = Network(sizes, [np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:])],
                  [np.zeros(b) for b in sizes[1:]], tuple(acts))
    net.set_flat(vec)
    return net


def network_to_bytes(net: Network) -> bytes:
    buf = io.BytesIO()
    write_network(net, buf)
    return buf.getvalue()


def network_from_bytes(data: bytes) -> Network:
    return read_network(io.BytesIO(data))


def _read_exact(fh, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise InputError("truncated checkpoint")
    return data
