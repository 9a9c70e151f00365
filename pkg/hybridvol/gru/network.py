"""
Stacked GRU network with a single linear output neuron.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..utils import ConstraintError, ShapeError
from .cell import ACTIVATIONS, GATE_NAMES, INPUT_KERNELS, CellCache, LayerWeights, cell_backward, cell_step


@dataclass(frozen=True)
class GruConfig:
    """
    Network layout and training hyperparameters.

    Attributes:
        layer_sizes (tuple): Units per stacked GRU layer, bottom first.
        input_dim (int): Features per time step.
        sequence_length (int): Time steps per input window.
        batch_size (int): Sequences per mini-batch.
        epochs (int): Passes over the training sequences.
        learning_rate (float): Adam step size.
        dropout_rate (float): Inverted-dropout rate on every layer's output sequence in training mode,
            the top layer included, so the dense head also sees a masked state.
        l2_lambda (float): Penalty on the squared input kernels.
        seed (int): Seed for initialization, shuffling and dropout masks.
        precision (int): 32 or 64 bit floats.
        activation (str): Candidate activation, ``relu`` or ``tanh``.
    """

    layer_sizes: Tuple[int, ...] = (512, 256, 128)
    input_dim: int = 3
    sequence_length: int = 6
    batch_size: int = 500
    epochs: int = 150
    learning_rate: float = 0.0009
    dropout_rate: float = 0.3
    l2_lambda: float = 0.00001
    seed: int = 0
    precision: int = 32
    activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        if not self.layer_sizes or min(self.layer_sizes) < 1:
            raise ConstraintError(f"layer sizes must be positive, got {self.layer_sizes}")
        for name in ("input_dim", "sequence_length", "batch_size"):
            if getattr(self, name) < 1:
                raise ConstraintError(f"{name} must be positive, got {getattr(self, name)}")
        if self.epochs < 0:
            raise ConstraintError(f"epochs must be nonnegative, got {self.epochs}")
        for name in ("learning_rate", "dropout_rate", "l2_lambda"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConstraintError(f"{name} must lie in [0, 1), got {getattr(self, name)}")
        if self.precision not in (32, 64):
            raise ConstraintError(f"precision must be 32 or 64, got {self.precision}")
        if self.activation not in ACTIVATIONS:
            raise ConstraintError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")

    @property
    def dtype(self) -> type:
        return np.float32 if self.precision == 32 else np.float64

    def to_dict(self) -> Dict[str, object]:
        out = asdict(self)
        out["layer_sizes"] = list(self.layer_sizes)
        return out

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON form of the configuration."""
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class GruWeights:
    """
    All trainable arrays, keyed ``layer{i}.{W_z,...,b_o}``, ``dense.w`` and ``dense.b``.

    ``feature_mean`` and ``feature_std`` standardize the inputs and are not trained.
    """

    params: Dict[str, np.ndarray]
    feature_mean: np.ndarray
    feature_std: np.ndarray
    layer_count: int = field(default=0)

    def __post_init__(self):
        if not self.layer_count:
            self.layer_count = sum(1 for key in self.params if key.endswith(".W_z"))

    def layer(self, i: int) -> LayerWeights:
        return LayerWeights(**{name: self.params[f"layer{i}.{name}"] for name in GATE_NAMES})

    @property
    def dense_w(self) -> np.ndarray:
        return self.params["dense.w"]

    @property
    def dense_b(self) -> np.ndarray:
        return self.params["dense.b"]

    def input_kernels(self) -> List[np.ndarray]:
        return [self.params[f"layer{i}.{name}"] for i in range(self.layer_count) for name in INPUT_KERNELS]

    def copy(self) -> "GruWeights":
        return GruWeights(
            {key: value.copy() for key, value in self.params.items()},
            self.feature_mean.copy(),
            self.feature_std.copy(),
            self.layer_count,
        )

    def is_finite(self) -> bool:
        return all(np.isfinite(value).all() for value in self.params.values())


def init_weights(config: GruConfig, seed: Optional[int] = None) -> GruWeights:
    """Glorot-uniform kernels and zero biases, drawn in a fixed order from ``seed``."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    dtype = config.dtype
    params: Dict[str, np.ndarray] = {}

    def glorot(fan_in: int, fan_out: int) -> np.ndarray:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)

    fan_in = config.input_dim
    for i, units in enumerate(config.layer_sizes):
        for gate in ("z", "r", "o"):
            params[f"layer{i}.W_{gate}"] = glorot(fan_in, units)
        for gate in ("z", "r", "o"):
            params[f"layer{i}.U_{gate}"] = glorot(units, units)
        for gate in ("z", "r", "o"):
            params[f"layer{i}.b_{gate}"] = np.zeros(units, dtype=dtype)
        fan_in = units
    params["dense.w"] = glorot(fan_in, 1)[:, 0]
    params["dense.b"] = np.zeros(1, dtype=dtype)
    return GruWeights(
        params,
        np.zeros(config.input_dim, dtype=dtype),
        np.ones(config.input_dim, dtype=dtype),
        len(config.layer_sizes),
    )


@dataclass
class ForwardCache:
    caches: List[List[CellCache]]
    masks: List[Optional[np.ndarray]]
    top_state: np.ndarray


def _check_batch(weights: GruWeights, config: GruConfig, X: np.ndarray) -> None:
    if X.ndim != 3 or X.shape[1:] != (config.sequence_length, config.input_dim):
        raise ShapeError(
            f"expected sequences of shape (batch, {config.sequence_length}, {config.input_dim}), got {X.shape}"
        )
    if weights.layer_count != len(config.layer_sizes):
        raise ShapeError(f"weights have {weights.layer_count} layers, config has {len(config.layer_sizes)}")


def forward_batch(
    weights: GruWeights,
    config: GruConfig,
    X: np.ndarray,
    train: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, ForwardCache]:
    """
    Predictions for a batch of sequences.

    Args:
        weights (GruWeights): Network weights.
        config (GruConfig): Layout; ``dropout_rate`` applies only when ``train`` is set.
        X (np.ndarray): Raw features, ``(batch, sequence_length, input_dim)``.
        train (bool): Apply dropout masks drawn from ``rng``.
        rng (np.random.Generator, optional): Required for training-mode dropout.

    Returns:
        tuple: Predictions ``(batch,)`` and the cache for ``backward_batch``.
    """
    _check_batch(weights, config, X)
    dtype = config.dtype
    seq = ((np.asarray(X, dtype=dtype) - weights.feature_mean) / weights.feature_std).astype(dtype)
    batch, steps, _ = seq.shape
    keep = 1.0 - config.dropout_rate
    use_dropout = train and config.dropout_rate > 0.0

    caches: List[List[CellCache]] = []
    masks: List[Optional[np.ndarray]] = []
    for i in range(weights.layer_count):
        layer = weights.layer(i)
        o = np.zeros((batch, layer.hidden_size), dtype=dtype)
        outputs = np.empty((batch, steps, layer.hidden_size), dtype=dtype)
        layer_caches = []
        for t in range(steps):
            o, cache = cell_step(layer, seq[:, t, :], o, config.activation)
            layer_caches.append(cache)
            outputs[:, t, :] = o
        if use_dropout:
            if rng is None:
                raise ValueError("training-mode dropout needs a random generator")
            mask = (rng.random(outputs.shape) < keep).astype(dtype) / dtype(keep)
            outputs = outputs * mask
        else:
            mask = None
        caches.append(layer_caches)
        masks.append(mask)
        seq = outputs

    top = seq[:, -1, :]
    predictions = top @ weights.dense_w + weights.dense_b[0]
    return predictions, ForwardCache(caches=caches, masks=masks, top_state=top)


def network_forward(weights: GruWeights, config: GruConfig, sequence: np.ndarray, mode: str = "eval",
                    rng: Optional[np.random.Generator] = None) -> float:
    """
    Prediction for one feature window of shape ``(sequence_length, input_dim)``.

    The stacked layers are unrolled from a zero state; the top layer's last state feeds the
    linear output neuron. ``mode="train"`` applies dropout with masks drawn from ``rng``.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    X = np.asarray(sequence)[None, ...]
    predictions, _ = forward_batch(weights, config, X, train=(mode == "train"), rng=rng)
    return float(predictions[0])


def predict(weights: GruWeights, config: GruConfig, X: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Eval-mode predictions for many sequences."""
    if len(X) == 0:
        return np.empty(0, dtype=config.dtype)
    out = [forward_batch(weights, config, X[k : k + chunk])[0] for k in range(0, len(X), chunk)]
    return np.concatenate(out)


def backward_batch(weights: GruWeights, config: GruConfig, cache: ForwardCache,
                   d_pred: np.ndarray) -> Dict[str, np.ndarray]:
    """
    Backpropagation through time of ``d loss / d prediction`` over the whole sequence.

    Returns:
        dict: Gradients keyed like ``weights.params``.
    """
    grads: Dict[str, np.ndarray] = {
        "dense.w": cache.top_state.T @ d_pred,
        "dense.b": np.array([d_pred.sum()], dtype=d_pred.dtype),
    }
    batch = d_pred.shape[0]
    steps = config.sequence_length
    top_size = weights.layer_count - 1
    d_out = np.zeros((batch, steps, config.layer_sizes[top_size]), dtype=d_pred.dtype)
    d_out[:, -1, :] = np.outer(d_pred, weights.dense_w)

    for i in reversed(range(weights.layer_count)):
        layer = weights.layer(i)
        if cache.masks[i] is not None:
            d_out = d_out * cache.masks[i]
        layer_grads = {name: np.zeros_like(layer.as_dict()[name]) for name in GATE_NAMES}
        d_in = np.zeros((batch, steps, layer.input_size), dtype=d_pred.dtype)
        d_state = np.zeros((batch, layer.hidden_size), dtype=d_pred.dtype)
        for t in reversed(range(steps)):
            d_o = d_out[:, t, :] + d_state
            dx, d_state, step_grads = cell_backward(layer, cache.caches[i][t], d_o, config.activation)
            d_in[:, t, :] = dx
            for name in GATE_NAMES:
                layer_grads[name] += step_grads[name]
        for name in GATE_NAMES:
            grads[f"layer{i}.{name}"] = layer_grads[name]
        d_out = d_in

    return {key: grads[key] for key in weights.params}
