"""Minimal reverse-mode autodiff with double backprop, MLPs and RMSProp."""

from topogen.autodiff.network import (
    Network,
    forward,
    frozen_params,
    grad_input,
    grad_of_gradient_penalty,
    grad_params,
    penalty_on_tape,
    read_network,
    write_network,
)
from topogen.autodiff.optim import RMSProp, rmsprop_step
from topogen.autodiff.tape import Node, Tape, grad

__all__ = [
    "Network",
    "Node",
    "RMSProp",
    "Tape",
    "forward",
    "frozen_params",
    "grad",
    "grad_input",
    "grad_of_gradient_penalty",
    "grad_params",
    "penalty_on_tape",
    "read_network",
    "rmsprop_step",
    "write_network",
]
