"""
Range-based daily volatility: the Garman-Klass estimator extended with the overnight gap,
and its rescaling to the magnitude of the return series.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from ..utils import (DegenerateScaleError, DomainError, InsufficientDataError,
                     PipelineLogger)
from .prices import DEFAULT_RETURN_SCALE, PriceSeries, ReturnSeries, write_value_csv

logger = PipelineLogger.get_logger(__name__)

CLOSE_OPEN_COEF = 2.0 * np.log(2.0) - 1.0


@dataclass(frozen=True)
class VolatilityEstimateSeries:
    """
    Volatility estimates in return-scale units.

    Attributes:
        values (pd.Series): σ per date; NaN marks dates without an estimate.
        window_n (int): Number of daily terms averaged per estimate.
        scale_factor (float, optional): Factor applied by ``scale_gkyz``; None if unscaled.
    """

    values: pd.Series
    window_n: int
    scale_factor: Optional[float] = None

    def __len__(self) -> int:
        return len(self.values)

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.values.index

    def present(self) -> pd.Series:
        """Only the dates that carry an estimate."""
        return self.values.dropna()

    def to_csv(self, path: str) -> None:
        write_value_csv(self.values, path)


def gkyz_daily_terms(prices: PriceSeries) -> pd.Series:
    """
    Per-day variance contributions
    ``ln(O/C_prev)^2 + 0.5 ln(H/L)^2 - (2 ln 2 - 1) ln(C/O)^2``; the first day has none.
    """
    o, h, l, c = (prices.frame[col] for col in ("open", "high", "low", "close"))
    gap = np.log(o / c.shift(1))
    high_low = np.log(h / l)
    close_open = np.log(c / o)
    return gap**2 + 0.5 * high_low**2 - CLOSE_OPEN_COEF * close_open**2


def gkyz_volatility(
    prices: PriceSeries, n: int = 10, scale: float = DEFAULT_RETURN_SCALE
) -> VolatilityEstimateSeries:
    """
    Trailing-window GKYZ volatility.

    The estimate at date i averages the daily terms of days i-n+1..i inclusive, so the
    first ``n`` dates carry no estimate.

    Args:
        prices (PriceSeries): OHLC records, at least ``n + 1`` of them.
        n (int): Window length in days.
        scale (float): Return scale the σ values are expressed in.

    Returns:
        VolatilityEstimateSeries: σ = scale * sqrt(mean of daily terms).

    Raises:
        InsufficientDataError: If the window is longer than the data allows.
    """
    if n < 1:
        raise DomainError(f"GKYZ window must be positive, got {n}")
    if len(prices) < n + 1:
        raise InsufficientDataError(
            f"GKYZ window {n} needs at least {n + 1} price records, got {len(prices)}"
        )
    terms = gkyz_daily_terms(prices)
    # each term is a sum of a square and a nonnegative range excess; clip rounding noise
    variance = terms.rolling(window=n, min_periods=n).mean().clip(lower=0.0)
    sigma = scale * np.sqrt(variance)
    sigma.name = "value"
    logger.debug(f"GKYZ window {n}: {int(sigma.notna().sum())} estimates")
    return VolatilityEstimateSeries(sigma, window_n=n)


def scale_gkyz(
    estimates: VolatilityEstimateSeries, returns: ReturnSeries, window_T: int
) -> VolatilityEstimateSeries:
    """
    Rescale estimates to the magnitude of the returns over the first ``window_T`` return dates.

    The factor is a / b with a the RMS of the first ``window_T`` returns and b the RMS of
    the estimates present on those same dates.

    Args:
        estimates (VolatilityEstimateSeries): Unscaled estimates.
        returns (ReturnSeries): Returns covering the scaling window.
        window_T (int): Number of leading return observations used.

    Returns:
        VolatilityEstimateSeries: Every σ multiplied by a / b, with the factor recorded.

    Raises:
        InsufficientDataError: If ``window_T`` exceeds the returns or no estimate falls
            inside the window.
        DegenerateScaleError: If b is zero.
    """
    if window_T < 1 or window_T > len(returns):
        raise InsufficientDataError(
            f"scaling window {window_T} does not fit {len(returns)} returns"
        )
    head = returns.values.iloc[:window_T]
    paired = estimates.values.reindex(head.index).dropna()
    if paired.empty:
        raise InsufficientDataError("no volatility estimate inside the scaling window")

    a = float(np.sqrt(np.mean(head.to_numpy() ** 2)))
    b = float(np.sqrt(np.mean(paired.to_numpy() ** 2)))
    if b == 0.0:
        raise DegenerateScaleError("volatility estimates are all zero over the scaling window")

    factor = a / b
    logger.info(f"GKYZ scaling factor {factor:.6f} over {window_T} returns ({len(paired)} estimates)")
    return VolatilityEstimateSeries(
        estimates.values * factor, window_n=estimates.window_n, scale_factor=factor
    )
