from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from ....evaluation import BacktestReport, build_report, reports_document
from ....garch import FitOptions, GarchSpec
from ....gru import GruConfig
from ....hybrid import (FeatureMatrix, ForecastRecord, GarchForecastSeries, HybridResult, RollingPlan,
                        build_features, forecasts_csv_frame, rolling_garch_forecasts, run_hybrid)
from ....market_data import (PriceSeries, ReturnSeries, VolatilityEstimateSeries, gkyz_volatility, log_returns,
                             scale_gkyz)
from ....risk import risk_csv_frame, risk_frame
from ....risk.measures import SOURCES
from ....utils import InsufficientDataError, PipelineLogger
from ...base import TransformStrategy


@dataclass
class ForecastState:
    """
    Everything a forecast run produces, filled in stage by stage.

    Attributes:
        asset (str): Asset label.
        model (str): Model label, ``FAMILY-Distribution``.
        prices (PriceSeries, optional): Input records.
        returns (ReturnSeries, optional): Log returns.
        gkyz (VolatilityEstimateSeries, optional): Scaled range volatility.
        garch (GarchForecastSeries, optional): Rolling one-step GARCH forecasts.
        features (FeatureMatrix, optional): GRU inputs and targets.
        hybrid (HybridResult, optional): Block-wise GRU outcome.
        records (list): Evaluated forecasts in date order.
        reports (list): One backtest report per forecast source.
        alphas (tuple): VaR tolerance levels of the risk artifacts.
    """

    asset: str = "asset"
    model: str = "GARCH-Normal"
    prices: Optional[PriceSeries] = None
    returns: Optional[ReturnSeries] = None
    gkyz: Optional[VolatilityEstimateSeries] = None
    garch: Optional[GarchForecastSeries] = None
    features: Optional[FeatureMatrix] = None
    hybrid: Optional[HybridResult] = None
    records: List[ForecastRecord] = field(default_factory=list)
    reports: List[BacktestReport] = field(default_factory=list)
    alphas: Sequence[float] = (0.05, 0.01)

    @property
    def complete(self) -> bool:
        return self.hybrid is None or self.hybrid.complete

    def report(self, source: str) -> Optional[BacktestReport]:
        return next((r for r in self.reports if r.source == source), None)

    def forecasts_frame(self) -> pd.DataFrame:
        return forecasts_csv_frame(self.records)

    def risk_csv(self, source: str) -> pd.DataFrame:
        return risk_csv_frame(risk_frame(self.records, source, self.alphas))

    def volatility_paths(self) -> pd.DataFrame:
        frame = self.forecasts_frame()
        return frame[["date", "sigma_gkyz", "sigma_garch", "sigma_hybrid"]]

    def var_paths(self) -> pd.DataFrame:
        """Long-format VaR paths with the realized return and breach marker of each date."""
        realized = pd.Series(
            [rec.realized_return for rec in self.records],
            index=pd.DatetimeIndex([rec.date for rec in self.records]).strftime("%Y-%m-%d"),
        )
        parts = []
        for source in SOURCES:
            frame = self.risk_csv(source)
            frame.insert(1, "return", realized.reindex(frame["date"]).to_numpy())
            frame.insert(2, "source", source)
            parts.append(frame)
        return pd.concat(parts, ignore_index=True)[["date", "return", "source", "alpha", "var", "es", "hit"]]

    def status(self) -> Dict[str, Any]:
        hybrid = self.hybrid
        return {
            "asset": self.asset,
            "model": self.model,
            "complete": self.complete,
            "forecasts": len(self.records),
            "blocks_planned": len(hybrid.blocks) if hybrid else 0,
            "blocks_completed": len(hybrid.best_epochs) if hybrid else 0,
            "failed_block": hybrid.failed_block if hybrid else None,
            "failure": str(hybrid.failure) if hybrid and hybrid.failure else None,
            "best_epochs": list(hybrid.best_epochs) if hybrid else [],
            "floored_outputs": hybrid.floored if hybrid else 0,
            "carried_garch_windows": self.garch.carried if self.garch is not None else 0,
            "repeated_garch_forecasts": self.garch.repeated if self.garch is not None else 0,
            "dropped_feature_rows": self.features.dropped if self.features is not None else 0,
        }

    def report_document(self) -> Dict[str, Any]:
        return reports_document(self.reports, {"asset": self.asset, "model": self.model, "complete": self.complete})


class ReturnsTransformStrategy(TransformStrategy):
    """
    Turns OHLC records into log returns and scaled GKYZ volatility.

    The GKYZ scaling factor pairs the estimates with the returns of the first GARCH window.
    """

    def __init__(self, asset: str, model: str, scale: float, gkyz_window: int, scaling_window: int,
                 alphas: Sequence[float] = (0.05, 0.01)):
        self.logger = PipelineLogger.get_logger(__name__)
        self.asset = asset
        self.model = model
        self.scale = scale
        self.gkyz_window = gkyz_window
        self.scaling_window = scaling_window
        self.alphas = tuple(alphas)

    def transform(self, data: PriceSeries) -> ForecastState:
        state = ForecastState(asset=self.asset, model=self.model, prices=data, alphas=self.alphas)
        state.returns = log_returns(data, self.scale)
        raw = gkyz_volatility(data, self.gkyz_window, self.scale)
        state.gkyz = scale_gkyz(raw, state.returns, min(self.scaling_window, len(state.returns)))
        self.logger.info(f"{self.asset}: {len(state.returns)} returns, GKYZ window {self.gkyz_window}")
        return state


class RollingGarchTransformStrategy(TransformStrategy):
    """
    Adds the rolling one-step GARCH forecasts.
    """

    def __init__(self, spec: GarchSpec, window: int, options: Optional[FitOptions] = None,
                 threads: int = 1, clamp: bool = False):
        self.logger = PipelineLogger.get_logger(__name__)
        self.spec = spec
        self.window = window
        self.options = options
        self.threads = threads
        self.clamp = clamp

    def transform(self, data: ForecastState) -> ForecastState:
        data.garch = rolling_garch_forecasts(
            self.spec, data.returns, self.window, self.options, self.threads, self.clamp
        )
        return data


class FeatureTransformStrategy(TransformStrategy):
    """
    Aligns returns, GKYZ and GARCH forecasts into the GRU feature matrix.
    """

    def __init__(self):
        self.logger = PipelineLogger.get_logger(__name__)

    def transform(self, data: ForecastState) -> ForecastState:
        data.features = build_features(data.returns, data.gkyz, data.garch)
        return data


class HybridTransformStrategy(TransformStrategy):
    """
    Trains the block GRUs and collects the evaluated forecasts. A diverged block leaves the
    earlier blocks' records in place and marks the state incomplete.
    """

    def __init__(self, plan: RollingPlan, config: GruConfig, weights_dir: Optional[str] = None):
        self.logger = PipelineLogger.get_logger(__name__)
        self.plan = plan
        self.config = config
        self.weights_dir = weights_dir

    def transform(self, data: ForecastState) -> ForecastState:
        data.hybrid = run_hybrid(self.plan, self.config, data.features, self.weights_dir)
        data.records = list(data.hybrid.records)
        if not data.hybrid.complete:
            self.logger.warning(
                f"Block {data.hybrid.failed_block} diverged; keeping {len(data.records)} forecasts of earlier blocks"
            )
        return data


class BacktestTransformStrategy(TransformStrategy):
    """
    Evaluates the GARCH and hybrid forecasts of the state with the full battery of tests.
    """

    def __init__(self, alphas: Sequence[float], es_alpha: float, bootstrap_b: int, seed: int):
        self.logger = PipelineLogger.get_logger(__name__)
        self.alphas = tuple(alphas)
        self.es_alpha = es_alpha
        self.bootstrap_b = bootstrap_b
        self.seed = seed

    def transform(self, data: ForecastState) -> ForecastState:
        if not data.records:
            self.logger.warning(f"{data.asset}: no forecasts to evaluate")
            data.reports = []
            return data
        data.reports = [
            build_report(data.records, source, self.alphas, self.es_alpha, self.bootstrap_b, self.seed,
                         data.asset, data.model)
            for source in SOURCES
        ]
        for report in data.reports:
            self.logger.info("\n" + report.to_table())
        return data


class ModelComparisonTransformStrategy(TransformStrategy):
    """
    Runs a forecast pipeline per model on the same prices and tabulates the headline statistics.

    Attributes:
        runs (dict): Model entry to the transform strategies of its run.
        loads (dict): Model entry to the load strategies writing its artifacts.
    """

    COLUMNS = ("model", "mse_garch", "mse_hybrid", "dm_p_value", "var5_garch", "var5_hybrid",
               "var1_garch", "var1_hybrid", "hit5_garch", "hit5_hybrid", "hit1_garch", "hit1_hybrid")

    def __init__(self, runs: Dict[str, List[TransformStrategy]], loads: Dict[str, List[Any]]):
        self.logger = PipelineLogger.get_logger(__name__)
        self.runs = runs
        self.loads = loads

    @staticmethod
    def _row(label: str, state: ForecastState) -> Dict[str, Any]:
        garch, hybrid = state.report("garch"), state.report("hybrid")
        row: Dict[str, Any] = {"model": label}
        row["mse_garch"] = garch.metrics.mse if garch else None
        row["mse_hybrid"] = hybrid.metrics.mse if hybrid else None
        row["dm_p_value"] = hybrid.dm.p_value if hybrid and hybrid.dm else None
        for pct, alpha in (("5", 0.05), ("1", 0.01)):
            for source, report in (("garch", garch), ("hybrid", hybrid)):
                coverage = report.coverage_at(alpha) if report else None
                row[f"var{pct}_{source}"] = coverage.exceedances if coverage else None
                row[f"hit{pct}_{source}"] = coverage.hit_ratio if coverage else None
        return row

    def transform(self, data: PriceSeries) -> pd.DataFrame:
        rows = []
        for label, strategies in self.runs.items():
            self.logger.info(f"Comparing model {label}")
            state: Any = data
            for strategy in strategies:
                state = strategy.transform(state)
            for strategy in self.loads.get(label, []):
                state = strategy.load(state)
            rows.append(self._row(label, state))
        if not rows:
            raise InsufficientDataError("no model to compare")
        return pd.DataFrame(rows, columns=list(self.COLUMNS))
