"""RMSProp updates on flat parameter vectors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

# defaults used throughout training
LR = 1e-3
RHO = 0.9
EPS = 1e-6


def rmsprop_step(params: np.ndarray, grads: np.ndarray, state: np.ndarray,
                 lr: float = LR, rho: float = RHO, eps: float = EPS) -> tuple[np.ndarray, np.ndarray]:
    """One RMSProp update. Returns ``(new_params, new_state)``; inputs are not modified.

    ``state <- rho * state + (1 - rho) * g**2`` and
    ``params <- params - lr * g / sqrt(state + eps)``.
    """
    if params.shape != grads.shape or params.shape != state.shape:
        raise ValueError("params, grads and state must share a shape")
    state = rho * state + (1.0 - rho) * grads * grads
    return params - lr * grads / np.sqrt(state + eps), state


@dataclass
class RMSProp:
    lr: float = LR
    rho: float = RHO
    eps: float = EPS
    state: Optional[np.ndarray] = None

    def step(self, net, grads: np.ndarray) -> None:
        """Update ``net`` in place from a flat gradient vector."""
        flat = net.flat()
        if self.state is None:
            self.state = np.zeros_like(flat)
        new, self.state = rmsprop_step(flat, grads, self.state, self.lr, self.rho, self.eps)
        net.set_flat(new)
