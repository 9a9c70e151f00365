from .forecast_pipelines import (BacktestTL, DescriptiveStatsETL, GarchFitETL,
                                 HybridForecastETL, ModelComparisonETL,
                                 SimulationEL)
