"""
Portable ``.npz`` archives of trained weights.

Each archive holds every array under its parameter name plus a JSON header with the array
shapes, the network configuration and its SHA-256 fingerprint.
"""

import json
from typing import Optional, Tuple

import numpy as np

from ..utils import ConfigError, PipelineLogger, ShapeError
from .network import GruConfig, GruWeights, init_weights

logger = PipelineLogger.get_logger(__name__)

_HEADER = "__header__"


def save_weights(weights: GruWeights, config: GruConfig, path: str) -> None:
    arrays = dict(weights.params)
    arrays["feature.mean"] = weights.feature_mean
    arrays["feature.std"] = weights.feature_std
    header = {
        "fingerprint": config.fingerprint(),
        "config": config.to_dict(),
        "shapes": {key: list(value.shape) for key, value in arrays.items()},
    }
    arrays[_HEADER] = np.array(json.dumps(header, sort_keys=True))
    with open(path, "wb") as handle:
        np.savez(handle, **arrays)
    logger.debug(f"Saved {len(weights.params)} weight arrays to {path}")


def load_weights(path: str, config: Optional[GruConfig] = None) -> Tuple[GruWeights, GruConfig]:
    """
    Read an archive written by ``save_weights``.

    Args:
        path (str): Archive location.
        config (GruConfig, optional): Expected configuration; its fingerprint must match.

    Returns:
        tuple: Weights and the configuration stored with them.

    Raises:
        ConfigError: If the fingerprint differs from ``config``'s.
        ShapeError: If an array is missing or its shape differs from the header or the layout.
    """
    with np.load(path, allow_pickle=False) as archive:
        header = json.loads(str(archive[_HEADER]))
        stored = header["config"]
        stored["layer_sizes"] = tuple(stored["layer_sizes"])
        stored_config = GruConfig(**stored)
        if stored_config.fingerprint() != header["fingerprint"]:
            raise ConfigError(f"{path}: configuration does not match its fingerprint")
        if config is not None and config.fingerprint() != header["fingerprint"]:
            raise ConfigError(f"{path}: weights were trained with a different configuration")

        layout = init_weights(stored_config, seed=0)
        params = {}
        for key, template in layout.params.items():
            if key not in archive.files:
                raise ShapeError(f"{path}: missing array {key}")
            value = archive[key]
            if list(value.shape) != header["shapes"][key] or value.shape != template.shape:
                raise ShapeError(f"{path}: array {key} has shape {value.shape}, expected {template.shape}")
            params[key] = value
        weights = GruWeights(params, archive["feature.mean"], archive["feature.std"], layout.layer_count)
    return weights, stored_config
