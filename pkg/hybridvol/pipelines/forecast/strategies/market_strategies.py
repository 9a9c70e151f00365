from typing import Optional, Tuple

import numpy as np
import pandas as pd

from ....garch import FitOptions, GarchFit, GarchParams, GarchSpec, fit, simulate
from ....market_data import PriceSeries, descriptive_stats, log_returns, synthesize_ohlc
from ....utils import PipelineLogger
from ...base import ExtractStrategy, TransformStrategy


class DescriptiveStatsTransformStrategy(TransformStrategy):
    """
    Summarizes the log returns of OHLC records as a ``statistic,value`` table.
    """

    def __init__(self, scale: float):
        self.logger = PipelineLogger.get_logger(__name__)
        self.scale = scale

    def transform(self, data: PriceSeries) -> pd.DataFrame:
        summary = descriptive_stats(log_returns(data, self.scale))
        frame = summary.to_frame()
        self.logger.info(f"Descriptive statistics (return scale {self.scale:g}):\n{frame.to_string(index=False)}")
        return frame


class SimulatedOhlcExtractStrategy(ExtractStrategy):
    """
    Generates OHLC records from a simulated GARCH path. The extracted pair holds the records
    and a ``date,sigma`` frame of the true daily volatility of each return.
    """

    def __init__(self, spec: GarchSpec, params: GarchParams, days: int, seed: int, scale: float,
                 start_price: float = 100.0, intraday_steps: int = 78, overnight_share: float = 0.2):
        self.logger = PipelineLogger.get_logger(__name__)
        self.spec = spec
        self.params = params
        self.days = days
        self.seed = seed
        self.scale = scale
        self.start_price = start_price
        self.intraday_steps = intraday_steps
        self.overnight_share = overnight_share

    def extract(self) -> Tuple[PriceSeries, pd.DataFrame]:
        returns, h = simulate(self.spec, self.params, self.days, self.seed)
        sigma = np.sqrt(h)
        prices = synthesize_ohlc(
            returns.to_numpy(),
            sigma,
            self.seed,
            scale=self.scale,
            start_price=self.start_price,
            intraday_steps=self.intraday_steps,
            overnight_share=self.overnight_share,
        )
        truth = pd.DataFrame({"date": prices.dates[1:].strftime("%Y-%m-%d"), "sigma": sigma})
        self.logger.info(f"Simulated {self.days} days of {self.spec.label} with seed {self.seed}")
        return prices, truth


class GarchFitTransformStrategy(TransformStrategy):
    """
    Fits one model to every return of the OHLC records.
    """

    def __init__(self, spec: GarchSpec, scale: float, options: Optional[FitOptions] = None):
        self.logger = PipelineLogger.get_logger(__name__)
        self.spec = spec
        self.scale = scale
        self.options = options

    def transform(self, data: PriceSeries) -> GarchFit:
        result = fit(self.spec, log_returns(data, self.scale), self.options)
        self.logger.info(
            f"{self.spec.label}: log-likelihood {result.log_likelihood:.4f}, converged {result.converged}, "
            f"AIC {result.aic:.4f}, BIC {result.bic:.4f}"
        )
        return result
