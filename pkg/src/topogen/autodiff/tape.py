"""Reverse-mode differentiation over an append-only tape of array operations.

Every operation appends a ``Node`` to its ``Tape``; inputs always precede
outputs, so walking the tape backwards is a valid reverse topological order.

Backward rules are written once against a tiny common vocabulary
(arithmetic operators, ``@``, ``.T`` and the ``_sum_to``/``_broadcast_to``/
``_reshape``/``_scatter`` helpers). With ``create_graph=False`` they run on
plain arrays. With ``create_graph=True`` they run on nodes, so the gradient
is itself recorded on the tape and can be differentiated again.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np


class Tape:
    def __init__(self):
        self.nodes: list[Node] = []
        self.bindings: list[tuple[object, list[Node]]] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def _push(self, value, parents=(), vjp=None, requires_grad=False) -> "Node":
        node = Node(self, np.asarray(value, dtype=np.float64), parents, vjp, requires_grad)
        self.nodes.append(node)
        return node

    def variable(self, value) -> "Node":
        """Leaf that gradients can be taken with respect to."""
        return self._push(np.array(value, dtype=np.float64), requires_grad=True)

    def constant(self, value) -> "Node":
        return self._push(value)

    def bind(self, net) -> list["Node"]:
        """Record the parameters of ``net`` as leaves, weights then bias per layer."""
        leaves = []
        for W, b in zip(net.weights, net.biases):
            leaves.append(self.variable(W))
            leaves.append(self.variable(b))
        self.bindings.append((net, leaves))
        return leaves

    def params_of(self, net) -> list["Node"]:
        for bound, leaves in self.bindings:
            if bound is net:
                return leaves
        raise KeyError("network not bound on this tape")


class Node:
    __slots__ = ("tape", "value", "parents", "vjp", "requires_grad", "index")
    __array_priority__ = 1000  # so ndarray (op) Node defers to Node

    def __init__(self, tape: Tape, value: np.ndarray, parents: tuple, vjp: Optional[Callable],
                 requires_grad: bool):
        self.tape = tape
        self.value = value
        self.parents = parents
        self.vjp = vjp
        self.requires_grad = requires_grad
        self.index = len(tape.nodes)

    @property
    def shape(self) -> tuple:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def __repr__(self) -> str:
        return f"Node(#{self.index}, shape={self.shape})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, index):
        return getitem(self, index)

    @property
    def T(self):
        return transpose(self)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis, keepdims)


def _val(x):
    return x.value if isinstance(x, Node) else x


def _tape_of(*xs) -> Tape:
    for x in xs:
        if isinstance(x, Node):
            return x.tape
    raise TypeError("at least one operand must be a Node")


def _lift(tape: Tape, x) -> Node:
    if isinstance(x, Node):
        if x.tape is not tape:
            raise ValueError("operands live on different tapes")
        return x
    return tape.constant(x)


def _op(value, parents: Sequence[Node], vjp) -> Node:
    tape = parents[0].tape
    rg = any(p.requires_grad for p in parents)
    return tape._push(value, tuple(parents), vjp if rg else None, rg)


def _binary(a, b):
    tape = _tape_of(a, b)
    return _lift(tape, a), _lift(tape, b)


# ---- shape helpers usable on both arrays and nodes ----

def _sum_to(x, shape):
    if tuple(np.shape(_val(x))) == tuple(shape):
        return x
    if isinstance(x, Node):
        return sum_to(x, shape)
    return _np_sum_to(x, shape)


def _np_sum_to(x: np.ndarray, shape) -> np.ndarray:
    lead = x.ndim - len(shape)
    if lead:
        x = x.sum(axis=tuple(range(lead)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and x.shape[i] != 1)
    if axes:
        x = x.sum(axis=axes, keepdims=True)
    return x.reshape(shape)


def _broadcast_to(x, shape):
    if tuple(np.shape(_val(x))) == tuple(shape):
        return x
    if isinstance(x, Node):
        return broadcast_to(x, shape)
    return np.broadcast_to(x, shape).copy()


def _reshape(x, shape):
    if isinstance(x, Node):
        return reshape(x, shape)
    return np.reshape(x, shape)


def _scatter(x, index, shape):
    if isinstance(x, Node):
        return scatter(x, index, shape)
    out = np.zeros(shape)
    out[index] = x
    return out


def _index(x, index):
    if isinstance(x, Node):
        return getitem(x, index)
    return x[index]


# ---- differentiable operations ----

def add(a, b) -> Node:
    a, b = _binary(a, b)
    sa, sb = a.shape, b.shape
    return _op(a.value + b.value, (a, b), lambda g, out, x, y: (_sum_to(g, sa), _sum_to(g, sb)))


def sub(a, b) -> Node:
    a, b = _binary(a, b)
    sa, sb = a.shape, b.shape
    return _op(a.value - b.value, (a, b), lambda g, out, x, y: (_sum_to(g, sa), _sum_to(-g, sb)))


def mul(a, b) -> Node:
    a, b = _binary(a, b)
    sa, sb = a.shape, b.shape
    return _op(a.value * b.value, (a, b),
               lambda g, out, x, y: (_sum_to(g * y, sa), _sum_to(g * x, sb)))


def div(a, b) -> Node:
    a, b = _binary(a, b)
    sa, sb = a.shape, b.shape
    return _op(a.value / b.value, (a, b),
               lambda g, out, x, y: (_sum_to(g / y, sa), _sum_to(-(g * out) / y, sb)))


def neg(a) -> Node:
    return _op(-a.value, (a,), lambda g, out, x: (-g,))


def matmul(a, b) -> Node:
    a, b = _binary(a, b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("matmul supports 2-D operands only")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch {a.shape} @ {b.shape}")
    return _op(a.value @ b.value, (a, b), lambda g, out, x, y: (g @ y.T, x.T @ g))


def transpose(a) -> Node:
    return _op(a.value.T, (a,), lambda g, out, x: (g.T,))


def reshape(a, shape) -> Node:
    src = a.shape
    return _op(a.value.reshape(shape), (a,), lambda g, out, x: (_reshape(g, src),))


def broadcast_to(a, shape) -> Node:
    src = a.shape
    return _op(np.broadcast_to(a.value, shape).copy(), (a,), lambda g, out, x: (_sum_to(g, src),))


def sum_to(a, shape) -> Node:
    src = a.shape
    return _op(_np_sum_to(a.value, shape), (a,), lambda g, out, x: (_broadcast_to(g, src),))


def sum_(a, axis=None, keepdims=False) -> Node:
    src = a.shape
    if axis is None:
        kept = (1,) * len(src)
    else:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        axes = tuple(ax % len(src) for ax in axes)
        kept = tuple(1 if i in axes else s for i, s in enumerate(src))

    def vjp(g, out, x):
        return (_broadcast_to(_reshape(g, kept), src),)

    return _op(a.value.sum(axis=axis, keepdims=keepdims), (a,), vjp)


def mean(a, axis=None, keepdims=False) -> Node:
    if axis is None:
        count = a.value.size
    else:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        count = int(np.prod([a.shape[ax] for ax in axes]))
    return sum_(a, axis, keepdims) * (1.0 / count)


def getitem(a, index) -> Node:
    src = a.shape
    return _op(a.value[index], (a,), lambda g, out, x: (_scatter(g, index, src),))


def scatter(a, index, shape) -> Node:
    value = np.zeros(shape)
    value[index] = a.value
    return _op(value, (a,), lambda g, out, x: (_index(g, index),))


def exp(a) -> Node:
    return _op(np.exp(a.value), (a,), lambda g, out, x: (g * out,))


def log(a) -> Node:
    return _op(np.log(a.value), (a,), lambda g, out, x: (g / x,))


def sqrt(a) -> Node:
    return _op(np.sqrt(a.value), (a,), lambda g, out, x: ((g * 0.5) / out,))


def tanh(a) -> Node:
    return _op(np.tanh(a.value), (a,), lambda g, out, x: (g * (1.0 - out * out),))


def sigmoid(a) -> Node:
    v = a.value
    e = np.exp(-np.abs(v))
    s = np.where(v >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return _op(s, (a,), lambda g, out, x: (g * (out * (1.0 - out)),))


def relu(a) -> Node:
    mask = (a.value > 0).astype(np.float64)
    return _op(a.value * mask, (a,), lambda g, out, x: (g * mask,))


def clip(a, lo: float, hi: float) -> Node:
    mask = ((a.value >= lo) & (a.value <= hi)).astype(np.float64)
    return _op(np.clip(a.value, lo, hi), (a,), lambda g, out, x: (g * mask,))


def square(a) -> Node:
    return mul(a, a)


# ---- gradients ----

def grad(output: Node, wrt: Sequence[Node], grad_output=None, create_graph: bool = False) -> list:
    """Gradients of ``output`` with respect to each node in ``wrt``.

    Returns arrays, or nodes on the same tape when ``create_graph`` is set.
    ``grad_output`` defaults to ones (so a non-scalar output is summed).
    """
    tape = output.tape
    nodes = tape.nodes
    top = output.index
    targets = {w.index for w in wrt}

    # nodes between wrt and output
    live = np.zeros(top + 1, dtype=bool)
    for i in targets:
        if i <= top:
            live[i] = True
    for i in range(min(targets, default=top + 1), top + 1):
        n = nodes[i]
        if not live[i] and n.vjp is not None:
            for p in n.parents:
                if live[p.index]:
                    live[i] = True
                    break

    seed = np.ones(output.shape) if grad_output is None else np.asarray(grad_output, np.float64)
    adj: dict = {top: tape.constant(seed) if create_graph else seed}
    if live[top]:
        for i in range(top, -1, -1):
            g = adj.get(i) if i in targets else adj.pop(i, None)
            if g is None:
                continue
            n = nodes[i]
            if n.vjp is None:
                continue
            if create_graph:
                contribs = n.vjp(g, n, *n.parents)
            else:
                contribs = n.vjp(g, n.value, *(p.value for p in n.parents))
            for p, c in zip(n.parents, contribs):
                if c is None or not live[p.index]:
                    continue
                j = p.index
                adj[j] = c if j not in adj else adj[j] + c

    out = []
    for w in wrt:
        g = adj.get(w.index)
        if g is None:
            zero = np.zeros(w.shape)
            g = tape.constant(zero) if create_graph else zero
        out.append(g)
    return out
