"""
Synthetic OHLC records built from a return path and its true volatility.

Each day's log return is split into an overnight gap and an intraday move. The intraday
path is a discretized Brownian bridge from the open to the close; its extremes, widened
by the discrete-monitoring correction, give the high and the low.
"""

from typing import Optional

import numpy as np
import pandas as pd

from ..utils import DomainError, PipelineLogger
from .prices import DEFAULT_RETURN_SCALE, PriceSeries

logger = PipelineLogger.get_logger(__name__)

# expected gap between a continuous and a discretely monitored Brownian maximum, in step std units
DISCRETE_MAX_CORRECTION = 0.5826


def synthesize_ohlc(
    returns: np.ndarray,
    sigma: np.ndarray,
    seed: int,
    scale: float = DEFAULT_RETURN_SCALE,
    start_price: float = 100.0,
    intraday_steps: int = 78,
    overnight_share: float = 0.2,
    start_date: str = "2000-01-03",
    dates: Optional[pd.DatetimeIndex] = None,
) -> PriceSeries:
    """
    Build OHLC records whose closes reproduce the given returns.

    Args:
        returns (np.ndarray): Daily log returns in ``scale`` units.
        sigma (np.ndarray): True daily volatility for each return, same units.
        seed (int): Seed of the generator used for the gap split and the bridges.
        scale (float): Return scale.
        start_price (float): Close preceding the first return.
        intraday_steps (int): Bridge discretization steps per day.
        overnight_share (float): Fraction of each day's variance carried by the gap, in [0, 1).
        start_date (str): First record date when ``dates`` is not given.
        dates (pd.DatetimeIndex, optional): ``len(returns) + 1`` record dates.

    Returns:
        PriceSeries: ``len(returns) + 1`` records; the first has open = high = low = close.
    """
    r = np.asarray(returns, dtype=float) / scale
    v = (np.asarray(sigma, dtype=float) / scale) ** 2
    if r.shape != v.shape:
        raise DomainError("returns and sigma must have the same length")
    if not 0.0 <= overnight_share < 1.0:
        raise DomainError(f"overnight share must lie in [0, 1), got {overnight_share}")
    if intraday_steps < 1:
        raise DomainError("intraday steps must be positive")

    rng = np.random.default_rng(seed)
    n = len(r)
    s = overnight_share

    # gap | r is Gaussian when gap and intraday move are independent Gaussians summing to r
    gap = s * r + np.sqrt(s * (1.0 - s) * v) * rng.standard_normal(n)
    move = r - gap

    step_sd = np.sqrt((1.0 - s) * v / intraday_steps)
    increments = rng.standard_normal((n, intraday_steps)) * step_sd[:, None]
    walk = np.cumsum(increments, axis=1)
    fraction = np.arange(1, intraday_steps + 1) / intraday_steps
    bridge = walk - fraction[None, :] * (walk[:, -1] - move)[:, None]
    path_max = np.maximum(bridge.max(axis=1), 0.0) + DISCRETE_MAX_CORRECTION * step_sd
    path_min = np.minimum(bridge.min(axis=1), 0.0) - DISCRETE_MAX_CORRECTION * step_sd

    close = np.empty(n + 1)
    close[0] = start_price
    # chained so that ln(C_t / C_{t-1}) reproduces r_t
    for t in range(n):
        close[t + 1] = close[t] * np.exp(r[t])
    open_ = np.empty(n + 1)
    open_[0] = start_price
    open_[1:] = close[:-1] * np.exp(gap)
    high = np.empty(n + 1)
    low = np.empty(n + 1)
    high[0] = low[0] = start_price
    high[1:] = np.maximum.reduce([open_[1:] * np.exp(path_max), open_[1:], close[1:]])
    low[1:] = np.minimum.reduce([open_[1:] * np.exp(path_min), open_[1:], close[1:]])

    if dates is None:
        dates = pd.bdate_range(start=start_date, periods=n + 1, name="date")
    frame = pd.DataFrame(
        {"open": open_, "high": high, "low": low, "close": close},
        index=pd.DatetimeIndex(dates, name="date"),
    )
    logger.debug(f"Synthesized {n + 1} OHLC records with {intraday_steps} intraday steps")
    return PriceSeries(frame)
