import os
from typing import Dict, List

from ...cli.config import RunConfig
from ...utils import PipelineLogger
from .. import base as PipelineBases
from .. import common as CommonStrategies
from . import strategies as ForecastStrategies


def forecast_transforms(config: RunConfig, output_dir: str) -> List[PipelineBases.TransformStrategy]:
    """Transform chain from OHLC records to evaluated forecasts under one configuration."""
    plan = config.rolling_plan()
    return [
        ForecastStrategies.ReturnsTransformStrategy(
            config.asset, config.model_label(), config.return_scale, config.gkyz_window,
            plan.garch_window, config.alphas,
        ),
        ForecastStrategies.RollingGarchTransformStrategy(
            config.garch_spec(), plan.garch_window, config.fit_options(), config.threads, config.forecast_clamp
        ),
        ForecastStrategies.FeatureTransformStrategy(),
        ForecastStrategies.HybridTransformStrategy(plan, config.gru_config(), output_dir),
        ForecastStrategies.BacktestTransformStrategy(config.alphas, config.es_alpha, config.bootstrap_b, config.seed),
    ]


def risk_loads(output_dir: str) -> List[PipelineBases.LoadStrategy]:
    return [
        CommonStrategies.LocalCsvLoadStrategy(output_dir, "risk_garch.csv", lambda s: s.risk_csv("garch")),
        CommonStrategies.LocalCsvLoadStrategy(output_dir, "risk_hybrid.csv", lambda s: s.risk_csv("hybrid")),
        CommonStrategies.LocalJsonLoadStrategy(output_dir, "backtest_report.json", lambda s: s.report_document()),
    ]


def forecast_loads(output_dir: str) -> List[PipelineBases.LoadStrategy]:
    """Artifact set of a forecast run; the status document is written last."""
    return (
        [CommonStrategies.LocalCsvLoadStrategy(output_dir, "forecasts.csv", lambda s: s.forecasts_frame())]
        + risk_loads(output_dir)
        + [
            CommonStrategies.LocalCsvLoadStrategy(output_dir, "volatility_paths.csv", lambda s: s.volatility_paths()),
            CommonStrategies.LocalCsvLoadStrategy(output_dir, "var_paths.csv", lambda s: s.var_paths()),
            CommonStrategies.LocalJsonLoadStrategy(output_dir, "run_status.json", lambda s: s.status()),
        ]
    )


class HybridForecastETL(PipelineBases.ETLPipeline):
    """
    An Extract-Transform-Load pipeline for the full forecast run: OHLC file in, forecasts,
    risk series, backtest reports and plot data out.
    """

    def __init__(self, config: RunConfig):
        self.logger = PipelineLogger.get_logger(__name__)
        try:
            extract_strategy = CommonStrategies.LocalOhlcCsvExtractStrategy(config.input_csv)
            super().__init__(
                [extract_strategy],
                forecast_transforms(config, config.output_dir),
                forecast_loads(config.output_dir),
                self.logger,
            )
            self.config = config
        except Exception as e:
            self.logger.error(f"Failed to initialize HybridForecastETL: {e}")
            raise


class BacktestTL(PipelineBases.DependentETLPipeline):
    """
    A Transform-Load pipeline that evaluates precomputed forecasts. Execute it with a
    ``ForecastState`` holding the records.
    """

    def __init__(self, config: RunConfig):
        self.logger = PipelineLogger.get_logger(__name__)
        try:
            transform_strategy = ForecastStrategies.BacktestTransformStrategy(
                config.alphas, config.es_alpha, config.bootstrap_b, config.seed
            )
            super().__init__([transform_strategy], risk_loads(config.output_dir), self.logger)
            self.config = config
        except Exception as e:
            self.logger.error(f"Failed to initialize BacktestTL: {e}")
            raise


class ModelComparisonETL(PipelineBases.ETLPipeline):
    """
    An Extract-Transform-Load pipeline running the forecast chain for every entry of
    ``compare_models``; each model's artifacts go to a subdirectory named by its label and the
    headline statistics to ``comparison.csv``.
    """

    def __init__(self, config: RunConfig):
        self.logger = PipelineLogger.get_logger(__name__)
        try:
            runs: Dict[str, List[PipelineBases.TransformStrategy]] = {}
            loads: Dict[str, List[PipelineBases.LoadStrategy]] = {}
            for entry in config.compare_models:
                model_config = config.for_model(entry)
                label = model_config.model_label()
                model_dir = os.path.join(config.output_dir, label)
                runs[label] = forecast_transforms(model_config, model_dir)
                loads[label] = forecast_loads(model_dir)
            super().__init__(
                [CommonStrategies.LocalOhlcCsvExtractStrategy(config.input_csv)],
                [ForecastStrategies.ModelComparisonTransformStrategy(runs, loads)],
                [CommonStrategies.LocalCsvLoadStrategy(config.output_dir, "comparison.csv")],
                self.logger,
            )
            self.config = config
        except Exception as e:
            self.logger.error(f"Failed to initialize ModelComparisonETL: {e}")
            raise


class DescriptiveStatsETL(PipelineBases.ETLPipeline):
    """
    An Extract-Transform-Load pipeline writing ``stats.csv`` for an OHLC file.
    """

    def __init__(self, config: RunConfig):
        self.logger = PipelineLogger.get_logger(__name__)
        try:
            super().__init__(
                [CommonStrategies.LocalOhlcCsvExtractStrategy(config.input_csv)],
                [ForecastStrategies.DescriptiveStatsTransformStrategy(config.return_scale)],
                [CommonStrategies.LocalCsvLoadStrategy(config.output_dir, "stats.csv")],
                self.logger,
            )
        except Exception as e:
            self.logger.error(f"Failed to initialize DescriptiveStatsETL: {e}")
            raise


class GarchFitETL(PipelineBases.ETLPipeline):
    """
    An Extract-Transform-Load pipeline fitting one model to a whole OHLC file and writing
    ``garch_fit.json``.
    """

    def __init__(self, config: RunConfig):
        self.logger = PipelineLogger.get_logger(__name__)
        try:
            super().__init__(
                [CommonStrategies.LocalOhlcCsvExtractStrategy(config.input_csv)],
                [ForecastStrategies.GarchFitTransformStrategy(config.garch_spec(), config.return_scale,
                                                              config.fit_options())],
                [CommonStrategies.LocalJsonLoadStrategy(config.output_dir, "garch_fit.json", lambda f: f.to_dict())],
                self.logger,
            )
        except Exception as e:
            self.logger.error(f"Failed to initialize GarchFitETL: {e}")
            raise


class SimulationEL(PipelineBases.ETLPipeline):
    """
    An Extract-Load pipeline writing a synthetic OHLC file and its true-volatility sidecar
    ``<name>_truth.csv``.
    """

    def __init__(self, config: RunConfig, file_name: str = "simulated_ohlc.csv"):
        self.logger = PipelineLogger.get_logger(__name__)
        try:
            spec, params = config.simulation_model()
            extract_strategy = ForecastStrategies.SimulatedOhlcExtractStrategy(
                spec, params, config.simulate_days, config.seed, config.return_scale,
                config.simulate_start_price, config.simulate_intraday_steps, config.simulate_overnight_share,
            )
            truth_name = os.path.splitext(file_name)[0] + "_truth.csv"
            super().__init__(
                [extract_strategy],
                [],
                [
                    CommonStrategies.LocalCsvLoadStrategy(config.output_dir, file_name, lambda d: d[0].csv_frame()),
                    CommonStrategies.LocalCsvLoadStrategy(config.output_dir, truth_name, lambda d: d[1]),
                ],
                self.logger,
            )
            self.ohlc_path = os.path.join(config.output_dir, file_name)
            self.truth_path = os.path.join(config.output_dir, truth_name)
        except Exception as e:
            self.logger.error(f"Failed to initialize SimulationEL: {e}")
            raise
