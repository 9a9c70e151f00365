"""
A single GRU cell: forward step, cached forward step and its backward pass.

Inputs are row vectors (or batches of rows) multiplied on the right: ``a = x @ W + o @ U + b``.
The update gate ``z`` mixes the previous state and the candidate as
``o = (1 - z) * o_prev + z * c``.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import special

from ..utils import ShapeError

ACTIVATIONS = ("relu", "tanh")
GATE_NAMES = ("W_z", "W_r", "W_o", "U_z", "U_r", "U_o", "b_z", "b_r", "b_o")
INPUT_KERNELS = ("W_z", "W_r", "W_o")


@dataclass
class LayerWeights:
    """Input kernels ``W_*`` (in x hidden), recurrent kernels ``U_*`` (hidden x hidden), biases ``b_*``."""

    W_z: np.ndarray
    W_r: np.ndarray
    W_o: np.ndarray
    U_z: np.ndarray
    U_r: np.ndarray
    U_o: np.ndarray
    b_z: np.ndarray
    b_r: np.ndarray
    b_o: np.ndarray

    @property
    def input_size(self) -> int:
        return self.W_z.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.W_z.shape[1]

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in GATE_NAMES}


@dataclass
class CellCache:
    x: np.ndarray
    o_prev: np.ndarray
    z: np.ndarray
    r: np.ndarray
    c: np.ndarray
    a_o: np.ndarray


def activate(a: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(a, 0.0)
    return np.tanh(a)


def _activation_grad(a: np.ndarray, c: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return (a > 0.0).astype(a.dtype)
    return 1.0 - c * c


def _check_shapes(layer: LayerWeights, x: np.ndarray, o_prev: np.ndarray) -> None:
    if x.shape[-1] != layer.input_size:
        raise ShapeError(f"input has {x.shape[-1]} features, layer expects {layer.input_size}")
    if o_prev.shape[-1] != layer.hidden_size:
        raise ShapeError(f"state has {o_prev.shape[-1]} units, layer has {layer.hidden_size}")
    if x.ndim != o_prev.ndim or (x.ndim == 2 and x.shape[0] != o_prev.shape[0]):
        raise ShapeError(f"input batch {x.shape} does not match state batch {o_prev.shape}")


def cell_step(layer: LayerWeights, x: np.ndarray, o_prev: np.ndarray,
              activation: str = "relu") -> Tuple[np.ndarray, CellCache]:
    """Forward step keeping the intermediates needed by ``cell_backward``."""
    _check_shapes(layer, x, o_prev)
    z = special.expit(x @ layer.W_z + o_prev @ layer.U_z + layer.b_z)
    r = special.expit(x @ layer.W_r + o_prev @ layer.U_r + layer.b_r)
    a_o = x @ layer.W_o + (r * o_prev) @ layer.U_o + layer.b_o
    c = activate(a_o, activation)
    o = (1.0 - z) * o_prev + z * c
    return o, CellCache(x=x, o_prev=o_prev, z=z, r=r, c=c, a_o=a_o)


def cell_forward(layer: LayerWeights, x: np.ndarray, o_prev: np.ndarray, activation: str = "relu") -> np.ndarray:
    """
    One GRU step.

    Args:
        layer (LayerWeights): Cell weights.
        x (np.ndarray): Input, shape ``(in,)`` or ``(batch, in)``.
        o_prev (np.ndarray): Previous state, shape ``(hidden,)`` or ``(batch, hidden)``.
        activation (str): Candidate activation, ``relu`` or ``tanh``.

    Returns:
        np.ndarray: New state, shaped like ``o_prev``.

    Raises:
        ShapeError: If the dimensions do not match the weights.
    """
    o, _ = cell_step(layer, x, o_prev, activation)
    return o


def cell_backward(layer: LayerWeights, cache: CellCache, d_o: np.ndarray,
                  activation: str = "relu") -> Tuple[np.ndarray, np.ndarray, Dict[str, np.ndarray]]:
    """
    Backward pass of one batched step.

    Args:
        layer (LayerWeights): Cell weights.
        cache (CellCache): Intermediates of the forward step.
        d_o (np.ndarray): Gradient with respect to the new state, ``(batch, hidden)``.
        activation (str): Candidate activation used in the forward step.

    Returns:
        tuple: Gradients with respect to the input, the previous state, and each weight.
    """
    x, o_prev, z, r, c = cache.x, cache.o_prev, cache.z, cache.r, cache.c

    dc = d_o * z
    dz = d_o * (c - o_prev)
    do_prev = d_o * (1.0 - z)

    da_o = dc * _activation_grad(cache.a_o, c, activation)
    ro = r * o_prev
    d_ro = da_o @ layer.U_o.T
    dr = d_ro * o_prev
    do_prev = do_prev + d_ro * r

    da_z = dz * z * (1.0 - z)
    da_r = dr * r * (1.0 - r)

    grads = {
        "W_z": x.T @ da_z,
        "W_r": x.T @ da_r,
        "W_o": x.T @ da_o,
        "U_z": o_prev.T @ da_z,
        "U_r": o_prev.T @ da_r,
        "U_o": ro.T @ da_o,
        "b_z": da_z.sum(axis=0),
        "b_r": da_r.sum(axis=0),
        "b_o": da_o.sum(axis=0),
    }
    dx = da_z @ layer.W_z.T + da_r @ layer.W_r.T + da_o @ layer.W_o.T
    do_prev = do_prev + da_z @ layer.U_z.T + da_r @ layer.U_r.T
    return dx, do_prev, grads
