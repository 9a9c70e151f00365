"""
Command implementations. Each builds the pipeline of its command from a ``RunConfig`` and
returns what it produced so callers and tests can inspect it.
"""

import json
import os
from typing import Tuple

import pandas as pd

from ..garch import GarchFit
from ..market_data import PriceSeries
from ..pipelines.common import LocalForecastCsvExtractStrategy
from ..pipelines.forecast import (BacktestTL, DescriptiveStatsETL, GarchFitETL, HybridForecastETL,
                                  ModelComparisonETL, SimulationEL)
from ..pipelines.forecast.strategies import ForecastState
from ..utils import ConfigError, PipelineLogger
from .config import RunConfig

logger = PipelineLogger.get_logger(__name__)


def cmd_stats(config: RunConfig) -> pd.DataFrame:
    """Descriptive statistics of the input's returns, written to ``stats.csv``."""
    config.require_input()
    return DescriptiveStatsETL(config).execute()


def cmd_simulate(config: RunConfig) -> Tuple[PriceSeries, pd.DataFrame]:
    """Synthetic OHLC records and their true volatility."""
    return SimulationEL(config).execute()


def cmd_garch_fit(config: RunConfig) -> GarchFit:
    config.require_input()
    return GarchFitETL(config).execute()


def _write_failure_status(config: RunConfig, error: Exception) -> None:
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, "run_status.json")
    status = {
        "asset": config.asset,
        "model": config.model_label(),
        "complete": False,
        "forecasts": 0,
        "failure": f"{type(error).__name__}: {error}",
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(status, handle, indent=2, sort_keys=True)
        handle.write("\n")


def cmd_run(config: RunConfig) -> ForecastState:
    """
    Full forecast run. A stage failure before any artifact is written leaves a ``run_status.json``
    naming the failure and re-raises; a diverged GRU block returns an incomplete state after
    writing the completed blocks' artifacts.
    """
    config.require_input()
    pipeline = HybridForecastETL(config)
    try:
        return pipeline.execute()
    except ConfigError:
        raise
    except Exception as e:
        _write_failure_status(config, e)
        raise


def cmd_backtest(config: RunConfig) -> ForecastState:
    """Reports and risk series for the forecasts CSV of an earlier run."""
    records = LocalForecastCsvExtractStrategy(config.forecasts_path, config.distribution_kind).extract()
    state = ForecastState(asset=config.asset, model=config.model_label(), records=records, alphas=config.alphas)
    return BacktestTL(config).execute(state)


def cmd_compare(config: RunConfig) -> pd.DataFrame:
    """Headline statistics of every ``compare_models`` entry, written to ``comparison.csv``."""
    config.require_input()
    if not config.compare_models:
        raise ConfigError("compare_models lists no FAMILY:DISTRIBUTION entry")
    return ModelComparisonETL(config).execute()
