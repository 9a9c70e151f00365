"""
Loss, Adam optimizer and the training loop with best-validation-epoch checkpointing.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..utils import GruDivergenceError, InsufficientDataError, PipelineLogger, ShapeError
from .network import GruConfig, GruWeights, backward_batch, forward_batch, init_weights, predict

logger = PipelineLogger.get_logger(__name__)


@dataclass(frozen=True)
class TrainingSet:
    """
    Feature windows and their one-step-ahead targets, in chronological order.

    Attributes:
        features (np.ndarray): ``(n, sequence_length, input_dim)`` windows.
        targets (np.ndarray): ``(n,)`` targets, the value following each window's last day.
    """

    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        targets = np.asarray(self.targets, dtype=float).reshape(-1)
        if features.ndim != 3:
            raise ShapeError(f"features must be (n, steps, dim), got shape {features.shape}")
        if len(features) != len(targets):
            raise ShapeError(f"{len(features)} windows but {len(targets)} targets")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return len(self.targets)

    def subset(self, index: np.ndarray) -> "TrainingSet":
        return TrainingSet(self.features[index], self.targets[index])


@dataclass
class TrainingHistory:
    train_loss: List[float] = field(default_factory=list)
    validation_loss: List[float] = field(default_factory=list)
    best_epoch: int = 0

    @property
    def best_validation_loss(self) -> float:
        if not self.validation_loss:
            return float("nan")
        return self.validation_loss[self.best_epoch - 1] if self.best_epoch else float("nan")


def l2_penalty(weights: GruWeights, l2_lambda: float) -> float:
    return float(l2_lambda * sum(np.sum(np.square(w, dtype=np.float64)) for w in weights.input_kernels()))


def loss(predictions: np.ndarray, targets: np.ndarray, weights: GruWeights, l2_lambda: float) -> float:
    """
    Mean squared error plus ``l2_lambda`` times the summed squares of the input kernels.

    Raises:
        ShapeError: If the series lengths differ or are empty.
    """
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    y = np.asarray(targets, dtype=np.float64).reshape(-1)
    if len(p) != len(y) or len(p) == 0:
        raise ShapeError(f"loss needs equal non-empty lengths, got {len(p)} and {len(y)}")
    return float(np.mean((p - y) ** 2)) + l2_penalty(weights, l2_lambda)


def loss_and_gradients(
    weights: GruWeights,
    config: GruConfig,
    features: np.ndarray,
    targets: np.ndarray,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[float, Dict[str, np.ndarray]]:
    """Loss and its gradient; dropout is applied only when ``rng`` is given."""
    dtype = config.dtype
    y = np.asarray(targets, dtype=dtype)
    predictions, cache = forward_batch(weights, config, features, train=rng is not None, rng=rng)
    value = loss(predictions, y, weights, config.l2_lambda)
    d_pred = (2.0 / len(y)) * (predictions - y)
    grads = backward_batch(weights, config, cache, d_pred.astype(dtype))
    if config.l2_lambda > 0.0:
        for i in range(weights.layer_count):
            for name in ("W_z", "W_r", "W_o"):
                key = f"layer{i}.{name}"
                grads[key] = grads[key] + dtype(2.0 * config.l2_lambda) * weights.params[key]
    return value, grads


class Adam:
    """
    Adam with bias-corrected moment estimates.

    Args:
        learning_rate (float): Step size.
        beta1 (float): Decay of the first moment.
        beta2 (float): Decay of the second moment.
        epsilon (float): Denominator floor.
    """

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        """Update ``params`` in place."""
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for key, grad in grads.items():
            if key not in self.m:
                self.m[key] = np.zeros_like(grad)
                self.v[key] = np.zeros_like(grad)
            self.m[key] = self.beta1 * self.m[key] + (1.0 - self.beta1) * grad
            self.v[key] = self.beta2 * self.v[key] + (1.0 - self.beta2) * grad * grad
            m_hat = self.m[key] / correction1
            v_hat = self.v[key] / correction2
            update = self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)
            params[key] -= update.astype(params[key].dtype)


def _standardization(features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    flat = features.reshape(-1, features.shape[-1])
    mean = flat.mean(axis=0)
    std = flat.std(axis=0)
    std[std == 0.0] = 1.0
    return mean, std


def train(
    config: GruConfig,
    data: TrainingSet,
    validation: TrainingSet,
    weights: Optional[GruWeights] = None,
) -> Tuple[GruWeights, TrainingHistory]:
    """
    Train with Adam on shuffled mini-batches and keep the best-validation epoch.

    Args:
        config (GruConfig): Layout and hyperparameters; ``config.seed`` drives every draw.
        data (TrainingSet): Training windows.
        validation (TrainingSet): Validation windows.
        weights (GruWeights, optional): Starting weights; freshly initialized when omitted.

    Returns:
        tuple: The weights of the epoch with the lowest validation loss, and the loss history.
        With zero epochs the starting weights are returned.

    Raises:
        InsufficientDataError: If either set is empty.
        GruDivergenceError: If a loss becomes non-finite.
    """
    if len(data) == 0 or len(validation) == 0:
        raise InsufficientDataError(
            f"training needs non-empty sets, got {len(data)} training and {len(validation)} validation windows"
        )
    rng = np.random.default_rng(config.seed)
    weights = weights.copy() if weights is not None else init_weights(config, seed=int(rng.integers(2**31)))
    mean, std = _standardization(data.features)
    weights.feature_mean = mean.astype(config.dtype)
    weights.feature_std = std.astype(config.dtype)

    dtype = config.dtype
    X = data.features.astype(dtype)
    y = data.targets.astype(dtype)
    X_val = validation.features.astype(dtype)
    y_val = validation.targets

    optimizer = Adam(config.learning_rate)
    history = TrainingHistory()
    best = weights.copy()
    best_loss = np.inf

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(y))
        batch_losses = []
        batch_sizes = []
        for start in range(0, len(order), config.batch_size):
            index = order[start : start + config.batch_size]
            value, grads = loss_and_gradients(weights, config, X[index], y[index], rng=rng)
            if not np.isfinite(value):
                logger.error(f"Training diverged at epoch {epoch}: loss {value}")
                raise GruDivergenceError(epoch, value)
            optimizer.step(weights.params, grads)
            batch_losses.append(value)
            batch_sizes.append(len(index))

        train_loss = float(np.average(batch_losses, weights=batch_sizes))
        val_loss = loss(predict(weights, config, X_val), y_val, weights, config.l2_lambda)
        if not np.isfinite(val_loss) or not weights.is_finite():
            logger.error(f"Training diverged at epoch {epoch}: validation loss {val_loss}")
            raise GruDivergenceError(epoch, val_loss)
        history.train_loss.append(train_loss)
        history.validation_loss.append(val_loss)
        if val_loss < best_loss:
            best_loss = val_loss
            best = weights.copy()
            history.best_epoch = epoch
        logger.debug(f"epoch {epoch}/{config.epochs}: train {train_loss:.6g}, validation {val_loss:.6g}")

    logger.info(
        f"Trained {len(data)} windows for {config.epochs} epochs; best validation loss "
        f"{history.best_validation_loss:.6g} at epoch {history.best_epoch}"
    )
    return best, history
